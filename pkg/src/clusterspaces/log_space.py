"""The log cluster space, its exponential map and the tangent-space fans.

Positive points are stored multiplicatively (``p = e^u``) as exact positive
rationals, so every real-chart Jacobian is an exact rational matrix.  A point
of the tangent bundle in chart ``c`` is a pair ``(p, v)`` where ``v`` is the
tangent vector written through the derivative of the log chart.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from ._exact import inverse, parse_rational, SingularMatrix
from .birational_charts import x_edge_jacobian, x_edge_transition, x_transition
from .cones import FanVerdict, check_fan, columns, random_directions
from .quiver_exchange import ExchangeGraph
from .tropical_fan import ClusterFan, TropicalPoint, tropical_transition


class DegenerateJacobian(ArithmeticError):
    """A chart Jacobian at a positive point was singular."""


class BranchCut(ValueError):
    """The argument of a logarithm lies on the principal branch cut."""


@dataclass(frozen=True)
class PositivePoint:
    chart: int
    p: tuple

    def __init__(self, chart: int, p: Sequence):
        vals = tuple(parse_rational(x) if isinstance(x, str) else x for x in p)
        if any(x <= 0 for x in vals):
            raise ValueError("positive point needs strictly positive coordinates")
        object.__setattr__(self, "chart", int(chart))
        object.__setattr__(self, "p", vals)


@dataclass(frozen=True)
class LogPoint:
    x: PositivePoint
    y: TropicalPoint


def positive_transition(E: ExchangeGraph, s1: int, s2: int, p: Sequence) -> list:
    """Cluster transition restricted to positive points (no poles possible)."""
    return x_transition(E, s1, s2, list(p))


# ----------------------------------------------------------------------
# Jacobians of the log charts

def log_edge_jacobian(B, k: int, p: Sequence) -> list[list]:
    """Jacobian of one log-chart transition in log coordinates, source labels."""
    B = np.asarray(B)
    n = len(p)
    row = [int(x) for x in B[k]]
    pk = p[k]
    one = pk ** 0
    J = [[0 * one for _ in range(n)] for _ in range(n)]
    for j in range(n):
        if j == k:
            J[j][k] = -one
            continue
        J[j][j] = one
        v = row[j]
        if v > 0:
            J[j][k] = v * pk / (1 + pk)
        elif v < 0:
            J[j][k] = -v / (1 + pk)
    return J


def _relabel_rows(M: list[list], rho: Sequence[int]) -> list[list]:
    out = [None] * len(M)
    for j, r in enumerate(M):
        out[rho[j]] = r
    return out


def _matmul(A: list[list], B: list[list]) -> list[list]:
    n, m, l = len(A), len(B), len(B[0])
    return [[sum((A[i][k] * B[k][j] for k in range(m)), 0 * A[i][0]) for j in range(l)] for i in range(n)]


def _identity(n: int, one=Fraction(1)) -> list[list]:
    return [[one if i == j else 0 * one for j in range(n)] for i in range(n)]


def chart_jacobians(E: ExchangeGraph, c: int, p: Sequence) -> dict[int, tuple[list, list]]:
    """For every vertex ``s``: point in chart ``s`` and Jacobian of the log chart ``c → s``."""
    one = p[0] ** 0
    out = {c: (list(p), _identity(E.rank, one))}
    queue = [c]
    while queue:
        a = queue.pop()
        pa, Ja = out[a]
        for i in range(E.rank):
            b = E.target(a, i)
            if b in out:
                continue
            rho = E.rho(a, i)
            pb = E.transport(a, b, pa, x_edge_transition, [(a, i)])
            Jb = _relabel_rows(_matmul(log_edge_jacobian(E.seeds[a].B, i, pa), Ja), rho)
            out[b] = (pb, Jb)
            queue.append(b)
    return out


def holomorphic_jacobian(E: ExchangeGraph, s1: int, s2: int, w: Sequence[complex]) -> np.ndarray:
    """Complex Jacobian of the cluster transition ``s1 → s2`` at ``w``."""
    n = E.rank
    cur = list(w)
    J = np.eye(n, dtype=complex)
    at = s1
    for s, i in E.path(s1, s2):
        Je = np.array(x_edge_jacobian(E.seeds[s].B, i, cur), dtype=complex)
        rho = E.rho(s, i)
        step = Je @ J
        J = np.empty_like(step)
        for j in range(n):
            J[rho[j]] = step[j]
        cur = E.transport(s, E.target(s, i), cur, x_edge_transition, [(s, i)])
        at = E.target(s, i)
    assert at == s2
    return J


# ----------------------------------------------------------------------
# tangent fans

@dataclass
class TangentFan:
    base: PositivePoint
    jacobians: dict
    cones: list
    verdict: FanVerdict | None = None

    def to_json(self) -> dict:
        return {
            "chart": self.base.chart,
            "at": [str(x) for x in self.base.p],
            "cones": [{"vertex": s, "gens": [[str(c) for c in g] for g in gens]}
                      for s, gens in enumerate(self.cones)],
        }


def tangent_fan(E: ExchangeGraph, x: PositivePoint, check: bool = True, samples: int = 0,
                rng: np.random.Generator | None = None) -> TangentFan:
    """Cones ``(dφ(c, s))^{-1}(R^n_{≥0})`` at ``x``, one per vertex, checked exactly."""
    data = chart_jacobians(E, x.chart, [Fraction(c) for c in x.p])
    cones = []
    jac = {}
    for s in E.vertices:
        J = data[s][1]
        try:
            Jinv = inverse(J)
        except SingularMatrix:
            raise DegenerateJacobian(f"singular Jacobian at vertex {s}") from None
        jac[s] = J
        cones.append(columns(Jinv))
    tf = TangentFan(x, jac, cones)
    if check:
        pts = None
        if samples:
            rng = rng or np.random.default_rng(0)
            pts = random_directions(rng, E.rank, samples, exact=True)
        tf.verdict = check_fan(cones, 0, pts)
    return tf


def _normalize_ray(g: Sequence[Fraction]) -> tuple:
    m = max(abs(c) for c in g)
    return tuple(c / m for c in g)


def face_lattice_match(tf: TangentFan, cf_opp: ClusterFan) -> list[str]:
    """Compare with the opposite graph's tropical fan through labelled rays.

    The tangent ray of label ``i`` at vertex ``s`` must map to the tropical
    ray of label ``i`` at ``s``; the map has to be well defined and bijective,
    which makes the two simplicial complexes isomorphic.
    """
    problems = []
    forward: dict = {}
    backward: dict = {}
    for s, gens in enumerate(tf.cones):
        for i, g in enumerate(gens):
            key = _normalize_ray(g)
            rid = cf_opp.ray_ids[s][i]
            if forward.setdefault(key, rid) != rid:
                problems.append(f"tangent ray at ({s},{i}) maps to two tropical rays")
            if backward.setdefault(rid, key) != key:
                problems.append(f"tropical ray {rid} has two tangent preimages")
    if len(forward) != len(cf_opp.rays):
        problems.append(f"ray counts differ: {len(forward)} vs {len(cf_opp.rays)}")
    return problems


# ----------------------------------------------------------------------
# the exponential map

def _admissible(J: list[list], v: Sequence, tol: float) -> list | None:
    vs = [sum((J[r][c] * v[c] for c in range(len(v))), 0 * J[r][0]) for r in range(len(v))]
    if all(c >= -tol for c in vs):
        return vs
    return None


def expl(E: ExchangeGraph, cf: ClusterFan, q: LogPoint, chart: int | None = None,
         out_chart: int | None = None) -> tuple[int, np.ndarray]:
    """``exp_L(q)``: read ``x`` and ``y`` in a chart ``s`` with ``y ∈ σ^s``.

    Returns the chart and the complex coordinates ``p(j) e^{i v(j)}``;
    ``out_chart`` transports the result there with the cluster transition.
    """
    y = q.y
    tol = 0 if all(isinstance(c, (int, Fraction)) for c in y.w) else 1e-12
    if chart is None:
        chart = cf.locate(y.chart, list(y.w), tol)
    v = tropical_transition(E, y.chart, chart, list(y.w))
    if any(c < -tol for c in v):
        raise ValueError(f"y is not in the cone of vertex {chart}")
    p = positive_transition(E, q.x.chart, chart, q.x.p)
    w = [float(a) * cmath.exp(1j * float(b)) for a, b in zip(p, v)]
    if out_chart is not None and out_chart != chart:
        w = x_transition(E, chart, out_chart, w)
        chart = out_chart
    return chart, np.array(w, dtype=complex)


def fiber_lattice(E: ExchangeGraph, chart: int, radius: float) -> list[tuple[int, ...]]:
    """Integer vectors ``k`` with ``|2πk|_∞ ≤ radius`` in the given chart."""
    K = int(math.floor(radius / (2 * math.pi) + 1e-12))
    return list(product(range(-K, K + 1), repeat=E.rank))


def fiber_over_positive(E: ExchangeGraph, x0: PositivePoint, radius: float) -> list[TropicalPoint]:
    """Points of ``2πZ`` in the chart of ``x0`` within sup-norm ``radius``.

    All of them have the same image under ``exp_L`` together with ``x0``.
    """
    return [TropicalPoint(x0.chart, [2 * math.pi * k for k in ks])
            for ks in fiber_lattice(E, x0.chart, radius)]


def h_map(E: ExchangeGraph, cf: ClusterFan, q: LogPoint, chart: int | None = None) -> tuple[PositivePoint, list]:
    """Tangent vector at ``x`` (chart of ``x``) read from ``y`` through a chart ``a ∋ y``."""
    c = q.x.chart
    if chart is None:
        chart = cf.locate(q.y.chart, list(q.y.w))
    ya = tropical_transition(E, q.y.chart, chart, list(q.y.w))
    if any(v < 0 for v in ya):
        raise ValueError(f"y is not in the cone of vertex {chart}")
    J = chart_jacobians(E, c, [Fraction(t) for t in q.x.p])[chart][1]
    Jinv = inverse(J)
    vec = [sum((Jinv[r][k] * Fraction(ya[k]) for k in range(E.rank)), Fraction(0)) for r in range(E.rank)]
    return q.x, vec


def h_inverse(E: ExchangeGraph, x: PositivePoint, v: Sequence, tol: float = 0) -> LogPoint:
    """The log point whose tangent vector at ``x`` is ``v``."""
    data = chart_jacobians(E, x.chart, list(x.p))
    for s in E.vertices:
        ys = _admissible(data[s][1], v, tol)
        if ys is not None:
            return LogPoint(x, TropicalPoint(s, [max(c, 0 * c) for c in ys]))
    raise ValueError("tangent vector is not covered by the tangent fan")


def exp_tangent(E: ExchangeGraph, x: PositivePoint, v: Sequence, out_chart: int | None = None,
                tol: float = 1e-12) -> np.ndarray:
    """Exponential of the tangent vector ``v`` at ``x`` (floats), in ``out_chart``."""
    out_chart = x.chart if out_chart is None else out_chart
    data = chart_jacobians(E, x.chart, [float(c) for c in x.p])
    for s in E.vertices:
        ps, J = data[s]
        vs = _admissible(J, [float(c) for c in v], tol)
        if vs is not None:
            w = [a * cmath.exp(1j * b) for a, b in zip(ps, vs)]
            return np.array(x_transition(E, s, out_chart, w), dtype=complex)
    raise ValueError("tangent vector is not covered by the tangent fan")


def _jacobian_derivative(E: ExchangeGraph, c: int, s: int, p: Sequence, du: Sequence,
                         h: float = 1e-30) -> np.ndarray:
    """Directional derivative of the chart Jacobian along ``du`` (complex step)."""
    if not any(du):
        return np.zeros((E.rank, E.rank))
    pc = [float(a) * cmath.exp(1j * h * float(d)) for a, d in zip(p, du)]
    J = chart_jacobians(E, c, pc)[s][1]
    return np.array([[z.imag / h for z in r] for r in J])


def tangent_differential(E: ExchangeGraph, x: PositivePoint, v: Sequence, s: int,
                         du: Sequence, dv: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Derivative of the tangent chart ``c → s`` at ``(x, v)`` applied to ``(du, dv)``."""
    data = chart_jacobians(E, x.chart, [float(c) for c in x.p])
    J = np.array(data[s][1], dtype=float)
    dJ = _jacobian_derivative(E, x.chart, s, x.p, du)
    vf = np.array([float(c) for c in v])
    du_s = J @ np.array(du, dtype=float)
    dv_s = J @ np.array(dv, dtype=float) + dJ @ vf
    return du_s, dv_s


def tangent_cone_vertices(E: ExchangeGraph, x: PositivePoint, v: Sequence, tol: float = 0) -> list[int]:
    """Vertices ``s`` with ``(x, v)`` in the cone of ``s``."""
    data = chart_jacobians(E, x.chart, list(x.p))
    return [s for s in E.vertices if _admissible(data[s][1], v, tol) is not None]


def exp_directional(E: ExchangeGraph, x: PositivePoint, v: Sequence, du: Sequence, dv: Sequence,
                    out_chart: int | None = None, tol: float = 1e-12) -> tuple[int, np.ndarray]:
    """One-sided derivative of the tangent exponential at ``(x, v)`` along ``(du, dv)``.

    The chart is any vertex ``s`` whose cone contains ``(x, v)`` and for
    which the direction keeps the fibre coordinates non-negative.  Returns
    the chart used and the complex tangent vector in ``out_chart``.
    """
    out_chart = x.chart if out_chart is None else out_chart
    data = chart_jacobians(E, x.chart, [float(c) for c in x.p])
    vf = [float(c) for c in v]
    for s in E.vertices:
        ps, J = data[s]
        vs = _admissible(J, vf, tol)
        if vs is None:
            continue
        du_s, dv_s = tangent_differential(E, x, vf, s, du, dv)
        if any(abs(a) <= tol and b < -tol for a, b in zip(vs, dv_s)):
            continue
        w = np.array([a * cmath.exp(1j * b) for a, b in zip(ps, vs)])
        dw = w * (du_s + 1j * dv_s)
        H = holomorphic_jacobian(E, s, out_chart, list(w))
        return s, H @ dw
    raise ValueError("no cone contains the direction")


def rotate_direction(E: ExchangeGraph, x: PositivePoint, v: Sequence, s: int,
                     du: Sequence, dv: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Almost complex structure of chart ``s`` applied to ``(du, dv)`` (chart of ``x``)."""
    n = E.rank
    M = np.zeros((2 * n, 2 * n))
    for k in range(2 * n):
        e = np.zeros(2 * n)
        e[k] = 1
        a, b = tangent_differential(E, x, v, s, e[:n], e[n:])
        M[:n, k] = a
        M[n:, k] = b
    a, b = tangent_differential(E, x, v, s, du, dv)
    rotated = np.concatenate([-b, a])
    back = np.linalg.solve(M, rotated)
    return back[:n], back[n:]


@dataclass
class DirectionalReport:
    trials: int = 0
    additivity_error: float = 0.0
    complex_error: float = 0.0
    finite_difference_error: float = 0.0
    central_difference_error: float = 0.0
    charts_seen: set = field(default_factory=set)

    def ok(self, additive: float = 1e-10, complex_tol: float = 1e-10, fd: float = 1e-7) -> bool:
        return (self.additivity_error <= additive and self.complex_error <= complex_tol
                and self.finite_difference_error <= fd)


def check_directional(E: ExchangeGraph, x: PositivePoint, v: Sequence, rng: np.random.Generator,
                      trials: int = 20, step: float = 1e-5) -> DirectionalReport:
    """Linearity, complex-linearity and finite-difference checks of the derivative."""
    n = E.rank
    rep = DirectionalReport()
    admissible = tangent_cone_vertices(E, x, v, tol=1e-12)
    for _ in range(trials):
        du1, dv1, du2, dv2 = (rng.normal(size=n) for _ in range(4))
        s1, d1 = exp_directional(E, x, v, du1, dv1)
        s2, d2 = exp_directional(E, x, v, du2, dv2)
        s3, d12 = exp_directional(E, x, v, du1 + du2, dv1 + dv2)
        rep.charts_seen.update((s1, s2, s3))
        rep.additivity_error = max(rep.additivity_error, float(np.max(np.abs(d12 - d1 - d2))))
        s = admissible[int(rng.integers(len(admissible)))]
        ru, rv = rotate_direction(E, x, v, s, du1, dv1)
        _, dr = exp_directional(E, x, v, ru, rv)
        rep.complex_error = max(rep.complex_error, float(np.max(np.abs(dr - 1j * d1))))
        cd1 = _central(E, x, v, du1, dv1, step)
        cd2 = _central(E, x, v, du1, dv1, 2 * step)
        # across a cone wall the map is only C^1, so the central difference
        # has an O(step) term; one Richardson step removes it
        fd = 2 * cd1 - cd2
        rep.central_difference_error = max(rep.central_difference_error, float(np.max(np.abs(cd1 - d1))))
        rep.finite_difference_error = max(rep.finite_difference_error, float(np.max(np.abs(fd - d1))))
        rep.trials += 1
    return rep


def _central(E: ExchangeGraph, x: PositivePoint, v: Sequence, du, dv, eps: float) -> np.ndarray:
    return (_shifted(E, x, v, du, dv, eps) - _shifted(E, x, v, du, dv, -eps)) / (2 * eps)


def _shifted(E: ExchangeGraph, x: PositivePoint, v: Sequence, du, dv, eps: float) -> np.ndarray:
    p = [float(a) * math.exp(eps * float(d)) for a, d in zip(x.p, du)]
    vv = [float(a) + eps * float(d) for a, d in zip(v, dv)]
    return exp_tangent(E, _FloatPoint(x.chart, p), vv, out_chart=x.chart, tol=1e-9)


@dataclass(frozen=True)
class _FloatPoint:
    chart: int
    p: tuple

    def __init__(self, chart, p):
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "p", tuple(p))


# ----------------------------------------------------------------------
# single-edge gluing formulas

def _log1p_exp(z: complex) -> complex:
    """Principal ``log(1 + e^z)`` for ``|Im z| < π``, stable for large ``|Re z|``."""
    if z.real > 0:
        return z + cmath.log(1 + cmath.exp(-z))
    return cmath.log(1 + cmath.exp(z))


def twistor_glue_edge(B, k: int, eps: complex, w: Sequence[complex]) -> list[complex]:
    """Single-edge gluing with parameter ``eps``, principal logarithms.

    ``w_j + eps v_kj log(1 + e^{±w_k/eps})`` with the sign of ``v_kj`` and
    ``-w_k`` on ``k``.  Raises :class:`BranchCut` when ``|Im(w_k/eps)| ≥ π``.
    """
    if eps == 0:
        raise ValueError("eps must be nonzero")
    B = np.asarray(B)
    z = complex(w[k]) / complex(eps)
    if abs(z.imag) >= math.pi:
        raise BranchCut(f"|Im(w_k/eps)| = {abs(z.imag)} reaches the branch cut")
    row = [int(c) for c in B[k]]
    out = []
    for j, x in enumerate(w):
        v = row[j]
        if j == k:
            out.append(-complex(x))
        elif v >= 0:
            out.append(complex(x) + eps * v * _log1p_exp(z))
        else:
            out.append(complex(x) + eps * v * _log1p_exp(-z))
    return out


def log_glue_edge(B, k: int, w: Sequence[complex]) -> list[complex]:
    """Single-edge gluing of the log space: ``log`` of the cluster transition."""
    B = np.asarray(B)
    row = [int(c) for c in B[k]]
    wk = complex(w[k])
    out = []
    for j, x in enumerate(w):
        v = row[j]
        if j == k:
            out.append(-wk)
        elif v >= 0:
            out.append(complex(x) + v * cmath.log(1 + cmath.exp(wk)))
        else:
            out.append(complex(x) + v * cmath.log(1 + cmath.exp(-wk)))
    return out
