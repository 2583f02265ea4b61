"""Certifier for combinatorially constant families of simplicial cones.

A family is ``σ(t) = Φ(t)(σ)`` for a fixed simplicial cone ``σ`` and
invertible matrices ``Φ(t)``.  A set of families is certified on a grid of
parameters when the cones form a complete fan at ``t0`` (hypothesis (i)) and
every facet shared at ``t0`` stays shared at each grid point (hypothesis (ii));
the conclusion, fan validity and completeness at each grid point, is then
verified directly.  The certificate only speaks about the sampled grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._exact import determinant, inverse, mat_mul, parse_rational
from .birational_charts import deformation_exponent, phi_t_edge
from .cones import check_fan, columns, random_directions, same_ray
from .quiver_exchange import ExchangeGraph
from .tropical_fan import ClusterFan


class NonInvertiblePhi(ArithmeticError):
    """``Φ(t)`` is singular at a requested parameter."""


@dataclass
class CCFamily:
    """A cone moved by a family of invertible matrices."""

    base: list[list]              # generator columns of the base cone
    phi: Callable[[object], list[list]]
    exact: bool = True
    name: str = ""
    spec: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.base[0])

    def matrix(self, t) -> list[list]:
        M = self.phi(t)
        det = determinant(M) if self.exact else float(np.linalg.det(np.array(M, dtype=float)))
        if (det == 0) if self.exact else abs(det) < 1e-12:
            raise NonInvertiblePhi(f"family {self.name or '?'} is singular at t={t}")
        return M

    def gens(self, t) -> list[list]:
        M = self.matrix(t)
        if self.exact:
            cols = [[Fraction(c) for c in g] for g in self.base]
            return columns(mat_mul(M, [list(r) for r in zip(*cols)]))
        A = np.array(M, dtype=float) @ np.array(self.base, dtype=float).T
        return [list(map(float, A[:, j])) for j in range(A.shape[1])]


# ----------------------------------------------------------------------
# built-in families

def constant_family(gens: Sequence[Sequence], name: str = "") -> CCFamily:
    n = len(gens[0])
    eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    return CCFamily([list(map(Fraction, g)) for g in gens], lambda t: eye, True, name,
                    {"kind": "samples", "ts": [0, 1], "matrices": [eye, eye]})


def sampled_family(base: Sequence[Sequence], ts: Sequence, matrices: Sequence, name: str = "") -> CCFamily:
    """Piecewise-linear interpolation of sampled matrices on a t-grid."""
    exact = all(isinstance(t, (int, Fraction)) for t in ts) and all(
        isinstance(c, (int, Fraction)) for M in matrices for r in M for c in r)
    ts = list(ts)
    mats = [[[Fraction(c) if exact else float(c) for c in r] for r in M] for M in matrices]

    def phi(t):
        if t <= ts[0]:
            return mats[0]
        for k in range(1, len(ts)):
            if t <= ts[k]:
                lam = (t - ts[k - 1]) / (ts[k] - ts[k - 1])
                A, B = mats[k - 1], mats[k]
                return [[(1 - lam) * a + lam * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]
        return mats[-1]

    base = [[Fraction(c) if exact else float(c) for c in g] for g in base]
    return CCFamily(base, phi, exact, name, {"kind": "samples", "ts": [str(t) for t in ts]})


def _unit(angle: float) -> list[float]:
    return [math.cos(angle), math.sin(angle)]


def rotation_family(speeds: Sequence[float], name: str = "") -> CCFamily:
    """Quadrant with its two rays turning at ``2π·speed`` radians per unit ``t``."""
    a, b = speeds

    def phi(t):
        u, w = _unit(2 * math.pi * a * float(t)), _unit(2 * math.pi * b * float(t))
        return [[u[0], w[0]], [u[1], w[1]]]

    return CCFamily([[1.0, 0.0], [0.0, 1.0]], phi, False, name,
                    {"kind": "rotation", "speeds": list(speeds)})


def rotating_rays_family(count: int = 3) -> list[CCFamily]:
    """Cones between consecutive rays ``e^{2πi(k-1)t}`` and ``e^{2πikt}``, ``k = 1..count``."""
    return [rotation_family((k - 1, k), name=f"sigma{k}") for k in range(1, count + 1)]


def deformed_log_edge_jacobian(B, k: int, t, r: int, p: Sequence) -> list[list]:
    """Log-coordinate Jacobian of the deformed transition across edge ``k``."""
    B = np.asarray(B)
    n = len(p)
    row = [int(x) for x in B[k]]
    kappa = 1 if r > 0 else -1
    c = t ** abs(r)
    pk = p[k]
    one = pk ** 0
    J = [[0 * one for _ in range(n)] for _ in range(n)]
    q = c * pk ** (-kappa)
    for j in range(n):
        if j == k:
            J[j][k] = -one
            continue
        J[j][j] = one
        v = row[j]
        if v:
            lead = kappa * v if kappa * v >= 0 else 0
            J[j][k] = lead - kappa * v * q / (1 + q)
    return J


def deformed_chart_jacobian(E: ExchangeGraph, cf: ClusterFan, a: int, m: Sequence[int],
                            s: int, t, p: Sequence) -> list[list]:
    """Jacobian at ``p`` (chart ``a``) of the deformed log transition ``a → s``."""
    n = E.rank
    cur = list(p)
    one = p[0] ** 0
    J = [[one if i == j else 0 * one for j in range(n)] for i in range(n)]
    for u, i in E.path(a, s):
        r = deformation_exponent(cf, a, m, u, i)
        Je = deformed_log_edge_jacobian(E.seeds[u].B, i, t, r, cur)
        step = mat_mul(Je, J)
        rho = E.rho(u, i)
        J = [None] * n
        for j in range(n):
            J[rho[j]] = step[j]
        cur = E.transport(u, E.target(u, i), cur, lambda B, k, w, r=r: phi_t_edge(B, k, t, r, w), [(u, i)])
    return J


def tangent_family(E: ExchangeGraph, p: Sequence, a: int = 0, m: Sequence[int] | None = None,
                   cf: ClusterFan | None = None) -> list[CCFamily]:
    """Deformed tangent cones at a positive point, one family per vertex.

    At ``t = 0`` the cones are the linear images of the orthants under the
    maps of the cone ``σ^a`` (the opposite graph's tropical fan); at ``t = 1``
    they are the tangent fan at ``p``.  ``Φ_s(t) = J_s(t)^{-1} J_s(0)``.
    """
    cf = cf or ClusterFan(E)
    m = [1] * E.rank if m is None else list(m)
    p = [Fraction(x) for x in p]
    fams = []
    for s in E.vertices:
        J0 = deformed_chart_jacobian(E, cf, a, m, s, Fraction(0), p)
        base = columns(inverse(J0))

        def phi(t, s=s, J0=J0):
            Jt = deformed_chart_jacobian(E, cf, a, m, s, Fraction(t), p)
            return mat_mul(inverse(Jt), J0)

        fams.append(CCFamily(base, phi, True, f"vertex{s}",
                             {"kind": "tangent", "vertex": s, "chart": a, "weights": m,
                              "at": [str(x) for x in p]}))
    return fams


# ----------------------------------------------------------------------
# verdicts

def _shared_facets(A: list[list], B: list[list], tol: float) -> int:
    return sum(1 for g in A if any(same_ray(g, h, tol) for h in B))


@dataclass
class FanAtVerdict:
    t: object
    is_fan: bool
    complete: bool
    violations: list[str]

    def to_json(self) -> dict:
        return {"t": str(self.t), "is_fan": self.is_fan, "complete": self.complete,
                "violations": self.violations}


def _tol(families: Sequence[CCFamily]) -> float:
    return 0 if all(f.exact for f in families) else 1e-10


def check_fan_at(families: Sequence[CCFamily], t, samples: int = 0, seed: int = 0) -> FanAtVerdict:
    """Pairwise common faces plus completeness of the cones at ``t``."""
    tol = _tol(families)
    cones = [f.gens(t) for f in families]
    pts = None
    if samples:
        pts = random_directions(np.random.default_rng(seed), families[0].dim, samples, exact=tol == 0)
    v = check_fan(cones, tol, pts)
    return FanAtVerdict(t, v.is_fan, v.complete, v.violations())


def facet_pairs(families: Sequence[CCFamily], t0) -> list[tuple[int, int]]:
    """Pairs of families whose cones share a facet at ``t0``."""
    tol = _tol(families)
    cones = [f.gens(t0) for f in families]
    n = families[0].dim
    return [(i, j) for i in range(len(cones)) for j in range(i + 1, len(cones))
            if _shared_facets(cones[i], cones[j], tol) == n - 1]


@dataclass
class PersistenceVerdict:
    pairs: list[tuple[int, int]]
    failures: list[tuple[object, tuple[int, int]]]

    @property
    def ok(self) -> bool:
        return not self.failures


def check_facet_persistence(families: Sequence[CCFamily], grid: Sequence, t0) -> PersistenceVerdict:
    """Every facet shared at ``t0`` is still shared at each grid point."""
    dims = {f.dim for f in families}
    if len(dims) != 1:
        raise ValueError("families must share the ambient dimension")
    tol = _tol(families)
    n = dims.pop()
    pairs = facet_pairs(families, t0)
    failures = []
    for t in _away_from(grid, t0):
        cones = [f.gens(t) for f in families]
        for i, j in pairs:
            if _shared_facets(cones[i], cones[j], tol) != n - 1:
                failures.append((t, (i, j)))
    return PersistenceVerdict(pairs, failures)


def _away_from(grid: Sequence, t0) -> list:
    """Grid points ordered by distance from ``t0`` (the order a deformation meets them)."""
    return sorted(grid, key=lambda t: (abs(float(t) - float(t0)), float(t)))


@dataclass
class DeformReport:
    t0: object
    grid: list
    hypothesis_i: FanAtVerdict
    hypothesis_ii: PersistenceVerdict | None
    per_t: list[FanAtVerdict] = field(default_factory=list)
    names: list[str] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return (self.hypothesis_i.is_fan and self.hypothesis_i.complete
                and self.hypothesis_ii is not None and self.hypothesis_ii.ok
                and all(v.is_fan and v.complete for v in self.per_t))

    @property
    def failure(self) -> dict | None:
        """First failure met when moving away from ``t0``."""
        h = self.hypothesis_i
        if not (h.is_fan and h.complete):
            return {"stage": "hypothesis (i)", "t": str(self.t0), "violations": h.violations}
        if self.hypothesis_ii is not None and self.hypothesis_ii.failures:
            t, (i, j) = self.hypothesis_ii.failures[0]
            return {"stage": "hypothesis (ii)", "t": str(t), "pair": [self._name(i), self._name(j)]}
        for v in self.per_t:
            if not (v.is_fan and v.complete):
                return {"stage": "conclusion", "t": str(v.t), "violations": v.violations}
        return None

    def _name(self, i: int) -> str:
        return self.names[i] if i < len(self.names) and self.names[i] else str(i)

    def to_json(self) -> dict:
        return {
            "t0": str(self.t0),
            "grid_size": len(self.grid),
            "certified": self.certified,
            "hypothesis_i": self.hypothesis_i.to_json(),
            "hypothesis_ii": None if self.hypothesis_ii is None else {
                "pairs": [[self._name(i), self._name(j)] for i, j in self.hypothesis_ii.pairs],
                "failures": [{"t": str(t), "pair": [self._name(i), self._name(j)]}
                             for t, (i, j) in self.hypothesis_ii.failures],
            },
            "per_t": [v.to_json() for v in self.per_t],
            "failure": self.failure,
        }


def certify(families: Sequence[CCFamily], t0, grid: Sequence, samples: int = 0, seed: int = 0) -> DeformReport:
    """Check both hypotheses on the grid and verify the conclusion at every grid point."""
    names = [f.name for f in families]
    h1 = check_fan_at(families, t0, samples, seed)
    if not (h1.is_fan and h1.complete):
        return DeformReport(t0, list(grid), h1, None, names=names)
    h2 = check_facet_persistence(families, grid, t0)
    rep = DeformReport(t0, list(grid), h1, h2, names=names)
    if h2.ok:
        rep.per_t = [check_fan_at(families, t, samples, seed) for t in _away_from(grid, t0)]
    return rep


def uniform_grid(start, stop, num: int, exact: bool = True) -> list:
    if num == 1:
        return [start]
    if exact:
        a, b = Fraction(start), Fraction(stop)
        return [a + (b - a) * k / (num - 1) for k in range(num)]
    return [float(x) for x in np.linspace(float(start), float(stop), num)]


# ----------------------------------------------------------------------
# JSON input

def families_from_json(spec: dict) -> tuple[list[CCFamily], object, list]:
    """Parse ``{dim, families: [{gens, phi}], t0, grid}``.

    ``grid`` is a list of values or ``{"start", "stop", "num"}``.  Rational
    strings stay exact; rotation families are floating point.
    """
    from .quiver_exchange import enumerate_exchange_graph, quiver_from_json

    dim = int(spec["dim"])
    fams: list[CCFamily] = []
    for k, item in enumerate(spec["families"]):
        phi = item["phi"]
        kind = phi["kind"]
        name = item.get("name", f"family{k}")
        if kind == "rotation":
            f = rotation_family(phi["speeds"], name)
        elif kind == "samples":
            f = sampled_family([[_num(c) for c in g] for g in item["gens"]],
                               [_num(t) for t in phi["ts"]],
                               [[[_num(c) for c in r] for r in M] for M in phi["matrices"]], name)
        elif kind == "tangent":
            E = enumerate_exchange_graph(quiver_from_json(phi["quiver"]))
            fam = tangent_family(E, [_num(c) for c in phi["at"]], int(phi.get("chart", 0)),
                                 phi.get("weights"))
            picks = phi.get("vertices")
            fams.extend(fam if picks is None else [fam[int(s)] for s in picks])
            continue
        else:
            raise ValueError(f"unknown family kind {kind!r}")
        fams.append(f)
    if any(f.dim != dim for f in fams):
        raise ValueError("family dimension does not match dim")
    exact = all(f.exact for f in fams)
    t0 = _num(spec["t0"]) if exact else float(_num(spec["t0"]))
    g = spec["grid"]
    if isinstance(g, dict):
        grid = uniform_grid(_num(g["start"]), _num(g["stop"]), int(g["num"]), exact)
    else:
        grid = [_num(t) if exact else float(_num(t)) for t in g]
    return fams, t0, grid


def _num(x):
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, int):
        return Fraction(x)
    return x
