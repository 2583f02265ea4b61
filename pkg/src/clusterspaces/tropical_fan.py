"""Tropical charts, maximal cones, the linear maps they induce, and the fan.

A point of the tropical space is a chart vertex together with coordinates.
For every vertex ``a`` the maximal cone ``σ^a`` is the preimage of the
positive orthant in chart ``a``; on it every transition is linear, and the
resulting integer matrices are cached in :class:`ClusterFan`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import cones as cg
from ._exact import integer_inverse
from .quiver_exchange import ExchangeGraph, opposite_graph, tropical_edge_map


@dataclass(frozen=True)
class TropicalPoint:
    chart: int
    w: tuple

    def __init__(self, chart: int, w: Sequence):
        object.__setattr__(self, "chart", int(chart))
        object.__setattr__(self, "w", tuple(w))


@dataclass(frozen=True, eq=False)
class Cone:
    chart: int
    gens: np.ndarray
    origin: int | None = None

    def columns(self) -> list[list[int]]:
        return [[int(x) for x in self.gens[:, j]] for j in range(self.gens.shape[1])]


@dataclass(frozen=True, eq=False)
class LinearChartMap:
    source: int
    target: int
    M: np.ndarray
    witness: int

    def __call__(self, w: Sequence) -> list:
        return [sum(int(self.M[r, c]) * w[c] for c in range(len(w))) for r in range(self.M.shape[0])]


def tropical_transition(E: ExchangeGraph, s1: int, s2: int, w: Sequence, steps=None) -> list:
    """Tropical coordinate change from chart ``s1`` to chart ``s2``."""
    return E.transport(s1, s2, w, tropical_edge_map, steps)


def maximal_cone(E: ExchangeGraph, a: int, s: int) -> Cone:
    """``σ^a`` in chart ``s``: images of the basis vectors of chart ``a``."""
    n = E.rank
    cols = []
    for j in range(n):
        e = [0] * n
        e[j] = 1
        cols.append(tropical_transition(E, a, s, e))
    return Cone(s, np.array(cols, dtype=np.int64).T, origin=a)


def orthant_sign_of_rows(gens: np.ndarray) -> list[int]:
    """Sign of each coordinate on a sign-coherent cone (0 for a zero row)."""
    out = []
    for row in gens:
        if (row > 0).any() and (row < 0).any():
            raise ValueError("cone is not contained in a single orthant")
        out.append(1 if (row > 0).any() else (-1 if (row < 0).any() else 0))
    return out


def edge_matrix(B: np.ndarray, i: int, kappa: int, rho: Sequence[int]) -> np.ndarray:
    """Linear map across edge ``i`` on a cone with tropical sign ``kappa``."""
    n = B.shape[0]
    M = np.zeros((n, n), dtype=np.int64)
    for j in range(n):
        if j == i:
            M[rho[i], i] = -1
            continue
        M[rho[j], j] = 1
        if kappa * B[i, j] >= 0:
            M[rho[j], i] += kappa * B[i, j]
    return M


def tropical_sign(E: ExchangeGraph, sigma: int, s: int, i: int) -> int:
    """Sign forced on coordinate ``i`` of chart ``s`` by the cone ``σ^sigma``."""
    return orthant_sign_of_rows(maximal_cone(E, sigma, s).gens)[i]


def mu_linear(E: ExchangeGraph, sigma: int, s1: int, s2: int, steps=None) -> LinearChartMap:
    """Compose the single-edge linear maps along a path, tracking signs on ``σ``."""
    gens = maximal_cone(E, sigma, s1).gens
    M = np.eye(E.rank, dtype=np.int64)
    for s, i in (E.path(s1, s2) if steps is None else steps):
        kappa = orthant_sign_of_rows(gens)[i]
        step = edge_matrix(E.seeds[s].B, i, kappa, E.rho(s, i))
        M = step @ M
        gens = step @ gens
    return LinearChartMap(s1, s2, M, sigma)


class ClusterFan:
    """Cached linear data of the tropical fan of a finite exchange graph.

    ``mu(a, s)`` is the linear map from chart ``a`` to chart ``s`` that agrees
    with the tropical transition on ``σ^a``; its columns generate ``σ^a(s)``.
    Rays get global ids through their coordinates in the base chart.
    """

    def __init__(self, E: ExchangeGraph):
        self.E = E
        self.n = E.rank
        V = len(E)
        self._mu = np.zeros((V, V, self.n, self.n), dtype=np.int64)
        for a in E.vertices:
            self._fill_from(a)
        self._mu_inv: dict[tuple[int, int], np.ndarray] = {}
        base = E.base
        keys: dict[tuple, int] = {}
        self.rays: list[tuple[int, ...]] = []
        self.ray_ids: list[tuple[int, ...]] = []
        for a in E.vertices:
            ids = []
            for j in range(self.n):
                key = tuple(int(x) for x in self._mu[a, base][:, j])
                if key not in keys:
                    keys[key] = len(self.rays)
                    self.rays.append(key)
                ids.append(keys[key])
            self.ray_ids.append(tuple(ids))
        self.cone_rays = [frozenset(ids) for ids in self.ray_ids]
        self.faces = sorted({frozenset(sub) for ids in self.ray_ids
                             for sub in _subsets(ids)}, key=lambda f: (len(f), sorted(f)))

    def _fill_from(self, a: int) -> None:
        E, n = self.E, self.n
        seen = {a}
        self._mu[a, a] = np.eye(n, dtype=np.int64)
        queue = [a]
        while queue:
            s = queue.pop(0)
            M = self._mu[a, s]
            signs = orthant_sign_of_rows(M)
            for i in range(n):
                t = E.target(s, i)
                if t in seen:
                    continue
                self._mu[a, t] = edge_matrix(E.seeds[s].B, i, signs[i], E.rho(s, i)) @ M
                seen.add(t)
                queue.append(t)

    def mu(self, a: int, s: int) -> np.ndarray:
        return self._mu[a, s]

    def mu_inv(self, a: int, s: int) -> np.ndarray:
        key = (a, s)
        if key not in self._mu_inv:
            self._mu_inv[key] = integer_inverse(self._mu[a, s])
        return self._mu_inv[key]

    def mu_between(self, sigma: int, s1: int, s2: int) -> np.ndarray:
        """``μ^{σ}(s1, s2)`` for the maximal cone ``σ = σ^sigma``."""
        return self._mu[sigma, s2] @ self.mu_inv(sigma, s1)

    def gens(self, a: int, s: int) -> np.ndarray:
        return self._mu[a, s]

    def labels_of(self, a: int, face: frozenset) -> list[int]:
        """Labels of chart ``a`` whose rays make up ``face`` (face ⊆ σ^a)."""
        return [j for j, r in enumerate(self.ray_ids[a]) if r in face]

    def locate(self, s: int, w: Sequence, tol: float = 0) -> int:
        """Smallest vertex ``a`` with ``w`` (chart ``s``) in ``σ^a``."""
        for a in self.E.vertices:
            coeffs = _apply(self.mu_inv(a, s), w)
            if all(c >= -tol for c in coeffs):
                return a
        raise ValueError("point is not covered by the fan")

    def containing(self, s: int, w: Sequence, tol: float = 0) -> list[int]:
        return [a for a in self.E.vertices if all(c >= -tol for c in _apply(self.mu_inv(a, s), w))]

    def face_of(self, s: int, w: Sequence, tol: float = 0) -> frozenset:
        """The unique face containing ``w`` in its relative interior."""
        a = self.locate(s, w, tol)
        coeffs = _apply(self.mu_inv(a, s), w)
        return frozenset(self.ray_ids[a][j] for j, c in enumerate(coeffs) if c > tol)


def _apply(M: np.ndarray, w: Sequence) -> list:
    return [sum(int(M[r, c]) * w[c] for c in range(len(w))) for r in range(M.shape[0])]


def _subsets(ids):
    from itertools import combinations
    for k in range(len(ids) + 1):
        yield from combinations(ids, k)


@dataclass
class Fan:
    chart: int
    cones: dict[int, np.ndarray]
    verdict: cg.FanVerdict | None = None
    projection: np.ndarray | None = None
    problems: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"chart": self.chart,
               "cones": [{"originVertex": a, "chart": self.chart, "gens": g.tolist()}
                         for a, g in self.cones.items()]}
        if self.projection is not None:
            out["projection"] = self.projection.tolist()
        return out


def _pair_face_problems(cf: ClusterFan, a: int, b: int) -> str | None:
    """Exact check that ``σ^a ∩ σ^b`` is the face spanned by shared rays.

    Work in chart ``b`` where ``σ^b`` is the positive orthant.  ``σ^a(b)`` lies
    in one orthant, so its meet with the positive orthant is the face cut out
    by the coordinates where it is non-positive; that face has to consist of
    basis vectors only.
    """
    G = cf.gens(a, b)
    try:
        signs = orthant_sign_of_rows(G)
    except ValueError:
        return "not sign-coherent"
    neg = [i for i, k in enumerate(signs) if k < 0]
    for j in range(G.shape[1]):
        col = G[:, j]
        if all(col[i] == 0 for i in neg):
            if (col < 0).any() or (col != 0).sum() != 1 or col.max() != 1:
                return f"generator {j} of σ^{a} meets σ^{b} outside their common face"
    return None


def build_fan(E: ExchangeGraph, chart: int, cf: ClusterFan | None = None,
              samples: list[list] | None = None) -> Fan:
    """All maximal cones in a chart, with the fan axioms verified exactly."""
    cf = ClusterFan(E) if cf is None else cf
    cones = {a: cf.gens(a, chart) for a in E.vertices}
    fan = Fan(chart, cones)
    keys = {g.tobytes() for g in cones.values()}
    if len(keys) != len(cones):
        fan.problems.append("maximal cones are not distinct")
    for a in E.vertices:
        try:
            orthant_sign_of_rows(cones[a])
        except ValueError:
            fan.problems.append(f"σ^{a} is not in a single orthant of chart {chart}")
        for b in E.vertices:
            if a < b:
                why = _pair_face_problems(cf, a, b) or _pair_face_problems(cf, b, a)
                if why:
                    fan.problems.append(why)
    gens = [cg.columns(cones[a]) for a in E.vertices]
    unpaired = [k for k, hits in cg.facet_neighbours(gens).items() if len(hits) != 1]
    if unpaired:
        fan.problems.append(f"{len(unpaired)} facets without a unique neighbour")
    verdict = cg.FanVerdict(E.rank, len(gens), distinct=len(keys) == len(cones))
    verdict.unpaired_facets = unpaired
    if samples:
        verdict.uncovered, verdict.multiply_covered = sample_coverage(cf, chart, samples)
        if verdict.uncovered:
            fan.problems.append(f"{len(verdict.uncovered)} sample points uncovered")
        if verdict.multiply_covered:
            fan.problems.append(f"{len(verdict.multiply_covered)} sample points in two cones off their shared face")
    fan.verdict = verdict
    return fan


def _integer_points(points: list[Sequence]) -> np.ndarray:
    # membership in a cone is invariant under positive scaling, so clearing
    # denominators keeps the test exact while allowing integer numpy algebra
    rows = []
    for p in points:
        fr = [Fraction(x) for x in p]
        lcm = int(np.lcm.reduce([x.denominator for x in fr]))
        rows.append([int(x * lcm) for x in fr])
    return np.array(rows, dtype=np.int64)


def sample_coverage(cf: ClusterFan, chart: int, points: list[Sequence]) -> tuple[list, list]:
    """Exact coverage test of rational points in a chart.

    Returns the uncovered points and the points lying in two maximal cones
    but outside the face those cones share.
    """
    X = _integer_points(points)
    D = np.stack([cf.mu_inv(a, chart) for a in cf.E.vertices])
    C = np.einsum("vij,nj->nvi", D, X)
    inside = (C >= 0).all(axis=2)
    uncovered = [points[k] for k in np.flatnonzero(~inside.any(axis=1))]
    doubled = []
    for k in np.flatnonzero(inside.sum(axis=1) > 1):
        hit = np.flatnonzero(inside[k])
        a = hit[0]
        for b in hit[1:]:
            shared = cf.cone_rays[a] & cf.cone_rays[b]
            off = [j for j, r in enumerate(cf.ray_ids[a]) if r not in shared]
            if any(C[k, a, j] != 0 for j in off):
                doubled.append(points[k])
                break
    return uncovered, doubled


def quotient_fan(E: ExchangeGraph, cf: ClusterFan, face: frozenset) -> Fan:
    """Fan induced on the quotient by the span of a face.

    Computed in the smallest chart ``s`` with the face inside ``σ^s``, where
    the face is a coordinate face and the quotient map drops coordinates.
    The fan-map property (every maximal cone projects into some quotient
    cone) and completeness of the quotient are verified.
    """
    s = next(a for a in E.vertices if face <= cf.cone_rays[a])
    drop = set(cf.labels_of(s, face))
    keep = [j for j in range(cf.n) if j not in drop]
    P = np.zeros((len(keep), cf.n), dtype=np.int64)
    for r, j in enumerate(keep):
        P[r, j] = 1
    star = [b for b in E.vertices if face <= cf.cone_rays[b]]
    cones = {}
    for b in star:
        G = cf.gens(b, s)
        outside = [j for j, r in enumerate(cf.ray_ids[b]) if r not in face]
        cones[b] = P @ G[:, outside]
    fan = Fan(s, cones, projection=P)
    if not keep:
        return fan
    qgens = [cg.columns(g) for g in cones.values()]
    verdict = cg.check_fan(qgens)
    fan.verdict = verdict
    fan.problems += verdict.violations()
    for a in E.vertices:
        img = cg.columns(P @ cf.gens(a, s))
        if not any(all(cg.contains(q, x) for x in img if any(x)) for q in qgens):
            fan.problems.append(f"σ^{a} does not project into a quotient cone")
    return fan


def boundary_map(cf: ClusterFan, x: TropicalPoint) -> TropicalPoint:
    """Read ``x`` in a chart ``s`` with ``x ∈ σ^s``; the result is meant for the opposite graph.

    On ``σ^s`` the coordinates in chart ``s`` are the simplicial coefficients
    of ``x`` with respect to the generators of ``σ^s``.
    """
    a = cf.locate(x.chart, x.w)
    return TropicalPoint(a, _apply(cf.mu_inv(a, x.chart), x.w))


def iota(x: TropicalPoint) -> TropicalPoint:
    """Negate coordinates; as a point of the opposite space this is chart-independent."""
    return TropicalPoint(x.chart, [-c for c in x.w])


@dataclass
class DualityReport:
    pairs: int = 0
    mismatches: list[tuple[int, int]] = field(default_factory=list)
    cone_mismatches: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.cone_mismatches


def check_duality(E: ExchangeGraph, cf: ClusterFan | None = None,
                  cf_opp: ClusterFan | None = None) -> DualityReport:
    """Compare linear maps of the opposite graph with those of ``E``.

    For every ordered pair the map on the opposite cone of ``s1`` must equal
    the map on the cone of ``s2``; and the opposite fan's cone of ``s`` in
    chart ``a`` must be the image of the positive orthant under ``μ^{σ^a}(s, a)``.
    """
    cf = ClusterFan(E) if cf is None else cf
    cf_opp = ClusterFan(opposite_graph(E)) if cf_opp is None else cf_opp
    rep = DualityReport()
    for s1 in E.vertices:
        for s2 in E.vertices:
            rep.pairs += 1
            if not np.array_equal(cf_opp.mu_between(s1, s1, s2), cf.mu_between(s2, s1, s2)):
                rep.mismatches.append((s1, s2))
    for a in E.vertices:
        for s in E.vertices:
            opp = {tuple(c) for c in cg.columns(cf_opp.gens(s, a))}
            mine = {tuple(c) for c in cg.columns(cf.mu_between(a, s, a))}
            if opp != mine:
                rep.cone_mismatches.append((s, a))
    return rep
