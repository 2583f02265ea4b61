"""Command line front end.

Exit status: 0 on success or a passing verdict, 1 on a failing verdict or a
domain error, 2 on usage errors.  Output is JSON with sorted keys unless
``--format dot`` or ``--format csv`` is requested.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from ._exact import format_exact, format_rational, is_gaussian, parse_exact, parse_rational


class UsageError(ValueError):
    """Malformed input; reported with exit status 2."""


class VerdictFailed(Exception):
    def __init__(self, payload: Any):
        super().__init__("verdict failed")
        self.payload = payload


# ----------------------------------------------------------------------
# input helpers

def _load_json(text: str) -> Any:
    """Inline JSON or a path to a JSON file."""
    t = text.strip()
    try:
        if t[:1] in "[{\"" or t[:1].isdigit() or t[:1] == "-":
            return json.loads(t)
        return json.loads(Path(text).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise UsageError(f"cannot read JSON from {text!r}: {err}") from None


def _quiver(args) -> np.ndarray:
    from .quiver_exchange import dynkin_exchange_matrix, quiver_from_json

    if args.quiver is None:
        raise UsageError("--quiver is required")
    try:
        text = args.quiver.strip()
        if text[:1] in "ADEade" and not Path(text).exists():
            return dynkin_exchange_matrix(text)
        data = _load_json(text)
        if isinstance(data, list):
            data = {"v": data}
        return quiver_from_json(data)
    except (KeyError, TypeError, ValueError) as err:
        raise UsageError(f"bad quiver: {err}") from None


def _graph(args):
    from .quiver_exchange import enumerate_exchange_graph

    return enumerate_exchange_graph(_quiver(args), cap=args.cap)


def _rationals(items: Sequence) -> list[Fraction]:
    try:
        return [parse_rational(x) for x in items]
    except (TypeError, ValueError, ZeroDivisionError) as err:
        raise UsageError(f"bad rational vector {items!r}: {err}") from None


def _complex(x) -> complex:
    try:
        if isinstance(x, (list, tuple)):
            return complex(float(parse_rational(x[0])), float(parse_rational(x[1])))
        if isinstance(x, str):
            try:
                return complex(float(parse_rational(x)))
            except ValueError:
                return complex(x.replace(" ", "").replace("i", "j"))
        return complex(x)
    except (TypeError, ValueError, ZeroDivisionError) as err:
        raise UsageError(f"bad complex number {x!r}: {err}") from None


def _real(text: str) -> float:
    """Floats, rationals and multiples of pi such as ``4pi`` or ``pi/2``."""
    t = text.replace(" ", "").lower().replace("π", "pi")
    try:
        if "pi" in t:
            head, _, tail = t.partition("pi")
            sign = -1.0 if head.startswith("-") else 1.0
            head = head.lstrip("+-")
            coef = float(parse_rational(head.rstrip("*"))) if head.rstrip("*") else 1.0
            if tail.startswith("/"):
                coef /= float(parse_rational(tail[1:]))
            elif tail:
                raise ValueError(tail)
            return sign * coef * math.pi
        return float(parse_rational(t)) if "/" in t else float(t)
    except (ValueError, ZeroDivisionError) as err:
        raise UsageError(f"bad number {text!r}: {err}") from None


# ----------------------------------------------------------------------
# output helpers

def _encode(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if is_gaussian(obj):
        return format_exact(obj)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_encode)


def _emit(args, payload, out) -> None:
    out.write(_dumps(payload) + "\n")


# ----------------------------------------------------------------------
# commands

def cmd_enumerate(args, out):
    E = _graph(args)
    if args.format == "dot":
        out.write(E.to_dot() + "\n")
        return
    data = E.to_json()
    data["vertex_count"] = len(E)
    _emit(args, data, out)


def cmd_fan(args, out):
    from .tropical_fan import ClusterFan, build_fan, quotient_fan

    E = _graph(args)
    cf = ClusterFan(E)
    if args.quotient is not None:
        face = frozenset(int(r) for r in _load_json(args.quotient))
        if face not in set(cf.faces):
            raise UsageError(f"{sorted(face)} is not a face of the fan")
        fan = quotient_fan(E, cf, face)
    else:
        rng = np.random.default_rng(args.seed)
        pts = _random_points(rng, E.rank, args.samples)
        fan = build_fan(E, args.chart, cf, pts)
    data = fan.to_json()
    data["seed"] = args.seed
    _emit(args, data, out)
    if fan.problems:
        raise VerdictFailed(None)


def _random_points(rng, n: int, count: int) -> list[list[Fraction]]:
    return [[Fraction(int(rng.integers(-1000, 1001)), int(rng.integers(1, 100))) for _ in range(n)]
            for _ in range(count)]


def cmd_check(args, out):
    from .quiver_exchange import check_edge_data, find_dt_element, sign_coherence_violations
    from .tropical_fan import ClusterFan, build_fan, check_duality

    E = _graph(args)
    what = args.what
    payload: dict = {"check": what, "seed": args.seed}
    ok = True
    if what == "sign-coherence":
        bad = sign_coherence_violations(E)
        payload.update(violations=bad, vertices=len(E))
        ok = not bad
    elif what == "completeness":
        cf = ClusterFan(E)
        rng = np.random.default_rng(args.seed)
        fan = build_fan(E, args.chart, cf, _random_points(rng, E.rank, args.samples))
        payload.update(samples=args.samples, problems=fan.problems, cones=len(fan.cones))
        ok = not fan.problems
    elif what == "duality":
        rep = check_duality(E)
        payload.update(pairs=rep.pairs, mismatches=rep.mismatches, cone_mismatches=rep.cone_mismatches)
        ok = rep.ok
    elif what == "dt":
        T = find_dt_element(E)
        payload["dt"] = None if T is None else T.to_json()
        ok = T is not None
    elif what == "poisson":
        from .birational_charts import check_poisson_edge

        rng = np.random.default_rng(args.seed)
        per_edge = max(1, args.samples // (len(E) * E.rank))
        mismatches = checked = 0
        for s in E.vertices:
            for k in range(E.rank):
                pts = [[Fraction(int(rng.integers(1, 50)), int(rng.integers(1, 50))) for _ in range(E.rank)]
                       for _ in range(per_edge)]
                rep = check_poisson_edge(E.exchange_matrix(s), k, pts)
                mismatches += len(rep.mismatches)
                checked += rep.checked
        payload.update(points=checked, mismatches=mismatches)
        ok = mismatches == 0
    payload["edge_data_problems"] = check_edge_data(E)
    ok = ok and not payload["edge_data_problems"]
    payload["ok"] = ok
    _emit(args, payload, out)
    if not ok:
        raise VerdictFailed(None)


def _stab_point(text: str):
    from .stability_space import StabPoint

    d = _load_json(text)
    try:
        return StabPoint.in_chart(int(d.get("chart", 0)), _rationals(d["x"]), _rationals(d["y"]))
    except (KeyError, AttributeError) as err:
        raise UsageError(f"stability point needs chart, x and y: {err}") from None


def cmd_stab(args, out):
    from .quiver_exchange import find_dt_element
    from .stability_space import (
        chart_test, check_dt_rotation, classify, flow, random_stab_point, varpi_eval,
    )
    from .tropical_fan import ClusterFan

    E = _graph(args)
    cf = ClusterFan(E)
    if args.action == "classify":
        p = _stab_point(args.point)
        cell = classify(cf, p)
        payload = {"cell": None if cell is None else cell.to_json(), "chart_test": chart_test(cf, p)}
        if cell is not None:
            w = varpi_eval(cf, cell, p)
            payload["chart_coordinates"] = {"re": list(w.re), "im": list(w.im)}
        _emit(args, payload, out)
        if cell is None:
            raise VerdictFailed(None)
    elif args.action == "flow":
        p = _stab_point(args.point)
        dt = find_dt_element(E) if args.theta < 0 else None
        q = flow(cf, p, args.r, args.theta, dt)
        cell = classify(cf, q, tol=1e-9)
        _emit(args, {"chart": q.x.chart, "x": list(q.x.w), "y": list(q.y.w),
                     "cell": None if cell is None else cell.to_json()}, out)
    else:
        dt = find_dt_element(E)
        if dt is None:
            _emit(args, {"ok": False, "dt": None}, out)
            raise VerdictFailed(None)
        rng = np.random.default_rng(args.seed)
        samples = [random_stab_point(cf, rng) for _ in range(args.samples)]
        rep = check_dt_rotation(cf, dt, samples)
        payload = {"ok": rep.ok, "samples": rep.samples, "cell_mismatches": rep.cell_mismatches,
                   "max_error": rep.max_error, "failures": rep.failures, "seed": args.seed}
        _emit(args, payload, out)
        if not rep.ok:
            raise VerdictFailed(None)


def _positive_point(text: str, chart: int):
    from .log_space import PositivePoint

    d = _load_json(text)
    if isinstance(d, dict):
        return PositivePoint(int(d.get("chart", chart)), _rationals(d["p"]))
    return PositivePoint(chart, _rationals(d))


def cmd_expl(args, out):
    from .log_space import LogPoint, expl, fiber_lattice, fiber_over_positive
    from .tropical_fan import ClusterFan, TropicalPoint

    E = _graph(args)
    cf = ClusterFan(E)
    if args.action == "eval":
        d = _load_json(args.point)
        try:
            x = _positive_point(json.dumps(d["x"]), args.chart)
            yd = d["y"]
            y = TropicalPoint(int(yd.get("chart", 0)), _rationals(yd["w"]))
        except (KeyError, AttributeError, TypeError) as err:
            raise UsageError(f"log point needs x and y: {err}") from None
        chart, w = expl(E, cf, LogPoint(x, y), out_chart=args.out_chart)
        _emit(args, {"chart": chart, "w": [complex(c) for c in w]}, out)
    else:
        x = _positive_point(args.at, args.chart)
        radius = _real(args.radius)
        base = expl(E, cf, LogPoint(x, TropicalPoint(x.chart, [0] * E.rank)))[1]
        ks = fiber_lattice(E, x.chart, radius)
        pts = fiber_over_positive(E, x, radius)
        dev = max(float(np.max(np.abs(expl(E, cf, LogPoint(x, y), out_chart=x.chart)[1] - base))) for y in pts)
        ok = dev <= args.tol
        _emit(args, {"count": len(pts), "lattice": [list(k) for k in ks], "scale": "2*pi",
                     "max_deviation": dev, "ok": ok}, out)
        if not ok:
            raise VerdictFailed(None)


def cmd_tangent(args, out):
    from .log_space import face_lattice_match, tangent_fan
    from .quiver_exchange import opposite_graph
    from .tropical_fan import ClusterFan

    E = _graph(args)
    x = _positive_point(args.at, args.chart)
    rng = np.random.default_rng(args.seed)
    tf = tangent_fan(E, x, samples=args.samples, rng=rng)
    problems = face_lattice_match(tf, ClusterFan(opposite_graph(E)))
    data = tf.to_json()
    ok = tf.verdict.is_fan and tf.verdict.complete and not problems
    data.update(is_fan=tf.verdict.is_fan, complete=tf.verdict.complete,
                violations=tf.verdict.violations(), face_lattice_problems=problems, ok=ok, seed=args.seed)
    _emit(args, data, out)
    if not ok:
        raise VerdictFailed(None)


def cmd_twistor(args, out):
    from .log_space import twistor_glue_edge

    v = _quiver(args)
    w = [_complex(c) for c in _load_json(args.point)]
    if len(w) != v.shape[0]:
        raise UsageError("point length does not match the quiver")
    if not 0 <= args.edge < v.shape[0]:
        raise UsageError("edge index out of range")
    res = twistor_glue_edge(v, args.edge, _complex(args.eps), w)
    _emit(args, {"w": res}, out)


def cmd_deform(args, out):
    from .fan_deformation import certify, families_from_json

    try:
        fams, t0, grid = families_from_json(_load_json(args.spec))
    except (KeyError, TypeError) as err:
        raise UsageError(f"bad deformation spec: {err}") from None
    rep = certify(fams, t0, grid, args.samples, args.seed)
    data = rep.to_json()
    data["seed"] = args.seed
    _emit(args, data, out)
    if not rep.certified:
        raise VerdictFailed(None)


def _poly(text: str):
    from .an_model import ApexPolynomial

    d = _load_json(text)
    if not isinstance(d, list):
        raise UsageError("polynomial must be a JSON list a_0..a_{n-1}")
    return ApexPolynomial([_complex(c) for c in d])


def cmd_an(args, out):
    from . import an_model as an

    if args.action == "flips":
        fg = an.flip_graph(args.m)
        data = {"m": args.m, "count": len(fg.triangulations),
                "triangulations": [T.to_json()["arcs"] for T in fg.triangulations],
                "edges": [{"src": s, "arc": i, "dst": int(fg.targets[s, i]), "rho": fg.rhos[s, i].tolist()}
                          for s in range(len(fg.triangulations)) for i in range(args.m - 3)],
                "quivers": [an.quiver_of_triangulation(T).tolist() for T in fg.triangulations]}
        _emit(args, data, out)
    elif args.action == "cross-ratio":
        T = _triangulation(args)
        pts = []
        for z in _load_json(args.points):
            if isinstance(z, str) and z.lower() in ("inf", "infinity"):
                pts.append("inf")
            else:
                try:
                    pts.append(parse_exact(z))
                except (ValueError, TypeError, ZeroDivisionError) as err:
                    raise UsageError(f"bad point {z!r}: {err}") from None
        coords = an.cross_ratio_chart(pts, T)
        _emit(args, {"arcs": [list(a) for a in T.arcs], "coordinates": coords}, out)
    elif args.action == "stokes":
        q = _poly(args.poly)
        T = _triangulation(args, m=q.m)
        if args.sweep:
            _stokes_sweep(args, q, T, out)
            return
        lines = an.stokes_lines(q, args.radius, args.tol, jobs=args.jobs)
        coords = an.stokes_to_cluster(lines, T)
        mod, arg = an.log_point_from_coordinates(coords, args.grafting_sign)
        pinned = an.pinned(lines, T)
        data = {"m": q.m, "radius": args.radius, "arcs": [list(a) for a in T.arcs],
                "lines": [list(z) for z in lines],
                "pinned": [None if z[1] == 0 else complex(z[0] / z[1]) for z in pinned],
                "coordinates": coords, "log_point": {"modulus": mod, "argument": arg},
                "grafting_sign": args.grafting_sign}
        if args.format == "csv":
            buf = io.StringIO()
            wr = csv.writer(buf, lineterminator="\n")
            wr.writerow(["arc", "re", "im"])
            for a, c in zip(T.arcs, coords):
                wr.writerow([f"{a[0]}-{a[1]}", repr(float(c.real)), repr(float(c.imag))])
            out.write(buf.getvalue())
        else:
            _emit(args, data, out)
    elif args.action == "period":
        q = _poly(args.poly)
        roots = [_complex(z) for z in _load_json(args.roots)]
        if len(roots) != 2:
            raise UsageError("--roots needs two roots")
        _emit(args, {"period": an.period_integral(q, roots[0], roots[1]), "sign": "defined up to sign"}, out)
    elif args.action == "scale":
        q = _poly(args.poly)
        s = _complex(args.s)
        qs = an.scaling_action(s, q)
        _emit(args, {"coefficients": list(qs.coeffs),
                     "discriminant_factor": an.scaling_discriminant_factor(s, q)}, out)


def _triangulation(args, m: int | None = None):
    from .an_model import Triangulation, fan_triangulation

    m = m or args.m
    if m is None:
        raise UsageError("--m is required")
    if getattr(args, "arcs", None):
        try:
            return Triangulation(m, _load_json(args.arcs))
        except (ValueError, TypeError) as err:
            raise UsageError(f"bad triangulation: {err}") from None
    return fan_triangulation(m)


def _stokes_sweep(args, q, T, out):
    from . import an_model as an

    try:
        k, start, stop, num = args.sweep.split(":")
        k, num = int(k), int(num)
        start, stop = _complex(start), _complex(stop)
    except ValueError:
        raise UsageError("--sweep expects K:START:STOP:NUM") from None
    if not 0 <= k < q.n:
        raise UsageError("sweep coefficient index out of range")
    rows = []
    for t in np.linspace(0, 1, num):
        c = list(q.coeffs)
        c[k] = start + (stop - start) * t
        qq = an.ApexPolynomial(c)
        coords = an.stokes_to_cluster(an.stokes_lines(qq, args.radius, args.tol, jobs=args.jobs), T)
        rows.append((c[k], coords))
    if args.format == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        head = ["a_re", "a_im"]
        for a in T.arcs:
            head += [f"x{a[0]}-{a[1]}_re", f"x{a[0]}-{a[1]}_im"]
        wr.writerow(head)
        for a, coords in rows:
            row = [repr(float(a.real)), repr(float(a.imag))]
            for c in coords:
                row += [repr(float(c.real)), repr(float(c.imag))]
            wr.writerow(row)
        out.write(buf.getvalue())
    else:
        _emit(args, {"sweep": [{"a": a, "coordinates": c} for a, c in rows]}, out)


# ----------------------------------------------------------------------
# parser

def _common(p: argparse.ArgumentParser, quiver: bool = True) -> None:
    if quiver:
        p.add_argument("--quiver", help="quiver JSON file, inline JSON (object or bare matrix) or Dynkin type such as A3")
        p.add_argument("--cap", type=int, default=100000, help="maximum number of seeds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--format", choices=("json", "dot", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clusterspaces", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="exchange graph of a quiver")
    _common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("fan", help="tropical fan in a chart, or a quotient fan")
    _common(p)
    p.add_argument("--chart", type=int, default=0)
    p.add_argument("--quotient", help="JSON list of ray ids spanning a face")
    p.set_defaults(func=cmd_fan)

    p = sub.add_parser("check", help="structural checks")
    p.add_argument("what", choices=("sign-coherence", "completeness", "duality", "dt", "poisson"))
    _common(p)
    p.add_argument("--chart", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("stab", help="stability space")
    p.add_argument("action", choices=("classify", "flow", "check-dt"))
    _common(p)
    p.add_argument("--point", help='JSON {"chart": s, "x": [...], "y": [...]}')
    p.add_argument("--theta", type=_real, default=0.0, help="angle such as pi/2; write negative values as --theta=-pi/2")
    p.add_argument("--r", type=float, default=0.0)
    p.set_defaults(func=cmd_stab)

    p = sub.add_parser("expl", help="exponential map of the log space")
    p.add_argument("action", choices=("eval", "fiber"))
    _common(p)
    p.add_argument("--point", help='JSON {"x": {"chart": s, "p": [...]}, "y": {"chart": s, "w": [...]}}')
    p.add_argument("--at", help="positive point, JSON list or {chart, p}")
    p.add_argument("--chart", type=int, default=0)
    p.add_argument("--out-chart", type=int, default=None)
    p.add_argument("--radius", default="0")
    p.set_defaults(func=cmd_expl)

    p = sub.add_parser("tangent", help="tangent-space fans")
    p.add_argument("action", choices=("fan",))
    _common(p)
    p.add_argument("--at", required=True)
    p.add_argument("--chart", type=int, default=0)
    p.set_defaults(func=cmd_tangent)

    p = sub.add_parser("twistor", help="single-edge twistor gluing")
    p.add_argument("action", choices=("glue",))
    _common(p)
    p.add_argument("--edge", type=int, default=0)
    p.add_argument("--eps", default="1")
    p.add_argument("--point", required=True, help="JSON list of complex numbers")
    p.set_defaults(func=cmd_twistor)

    p = sub.add_parser("deform", help="fan-deformation certificates")
    p.add_argument("action", choices=("certify",))
    _common(p, quiver=False)
    p.add_argument("--spec", required=True, help="deformation spec JSON")
    p.set_defaults(func=cmd_deform, samples=0)

    p = sub.add_parser("an", help="polygon model of type A")
    p.add_argument("action", choices=("flips", "cross-ratio", "stokes", "period", "scale"))
    _common(p, quiver=False)
    p.add_argument("--m", type=int)
    p.add_argument("--arcs", help="JSON list of arcs; default is the fan at vertex 0")
    p.add_argument("--points", help="JSON list of points; 'inf' allowed")
    p.add_argument("--poly", help="JSON list a_0..a_{n-1}")
    p.add_argument("--radius", type=float, default=8.0)
    p.add_argument("--roots", help="JSON pair of roots")
    p.add_argument("--s", default="0")
    p.add_argument("--grafting-sign", type=int, choices=(1, -1), default=1)
    p.add_argument("--sweep", help="K:START:STOP:NUM sweep of coefficient a_K")
    p.set_defaults(func=cmd_an)
    return parser


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "samples", 0) < 0:
        err.write("--samples must be non-negative\n")
        return 2
    for name in ("cap", "jobs"):
        if getattr(args, name, 1) < 1:
            err.write(f"--{name} must be positive\n")
            return 2
    if getattr(args, "tol", 1) <= 0:
        err.write("--tol must be positive\n")
        return 2
    try:
        args.func(args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return 2
    except VerdictFailed:
        return 1
    except Exception as exc:  # domain errors from the library
        err.write(_dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
