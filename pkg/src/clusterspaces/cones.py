"""Geometry of full-dimensional simplicial cones.

Cones are given by generator matrices whose columns are the rays.  Entries
are either exact (``int``/``Fraction``) or floats; every predicate takes a
``tol`` argument which must be ``0`` for exact data.

Pairwise intersections are decided with a separating functional: two
simplicial cones meet in the face spanned by their shared rays iff some
linear functional vanishes on the shared rays, is positive on the other rays
of the first cone and negative on the other rays of the second.  Candidates
come from the dual bases or from a floating LP, and every accepted
certificate is re-checked in the input arithmetic.  When no candidate is
found for exact data an exact simplex decides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from ._exact import SingularMatrix, inverse, mat_vec, rank

Matrix = Sequence[Sequence]


def columns(M) -> list[list]:
    arr = np.asarray(M, dtype=object)
    return [list(arr[:, j]) for j in range(arr.shape[1])]


def _is_exact(vecs) -> bool:
    return all(not isinstance(x, float) for v in vecs for x in v)


def same_ray(u: Sequence, v: Sequence, tol: float = 0) -> bool:
    """Whether ``u`` and ``v`` span the same ray (positive multiples)."""
    d = len(u)
    for a in range(d):
        for b in range(a + 1, d):
            if abs(u[a] * v[b] - u[b] * v[a]) > tol:
                return False
    return sum(x * y for x, y in zip(u, v)) > 0


def shared_rays(A: list[list], B: list[list], tol: float = 0) -> list[tuple[int, int]]:
    """Pairs ``(i, j)`` with ``A[i]`` and ``B[j]`` on the same ray."""
    return [(i, j) for i, a in enumerate(A) for j, b in enumerate(B) if same_ray(a, b, tol)]


def dual_rows(gens: list[list], tol: float = 0) -> list[list]:
    """Rows of the inverse generator matrix (facet functionals)."""
    M = [[g[r] for g in gens] for r in range(len(gens[0]))]
    if tol == 0 and _is_exact(gens):
        return inverse(M)
    arr = np.array(M, dtype=float)
    if abs(np.linalg.det(arr)) < tol:
        raise SingularMatrix("generators are degenerate")
    return np.linalg.inv(arr).tolist()


def contains(gens: list[list], x: Sequence, tol: float = 0, dual=None) -> bool:
    """Closed-cone membership by solving for the simplicial coordinates."""
    rows = dual_rows(gens, tol) if dual is None else dual
    return all(c >= -tol for c in mat_vec(rows, x)) if tol == 0 else \
        all(c >= -tol for c in np.asarray(rows, dtype=float) @ np.asarray(x, dtype=float))


def interior_contains(gens: list[list], x: Sequence, tol: float = 0, dual=None) -> bool:
    rows = dual_rows(gens, tol) if dual is None else dual
    coeffs = mat_vec(rows, x) if tol == 0 else list(np.asarray(rows, dtype=float) @ np.asarray(x, dtype=float))
    return all(c > tol for c in coeffs)


@dataclass
class PairVerdict:
    ok: bool
    shared: list[tuple[int, int]]
    certificate: list | None = None
    reason: str = ""


def _try_separator(f_rows: list[list], others: list[list], tol: float) -> list | None:
    """Search ``c > 0`` with ``sum_j c_j f_j(b) < 0`` for every ``b``.

    Returns the coefficients of a verified separator or ``None``.
    """
    k = len(f_rows)
    if not others:
        return [1] * k
    N = [[sum(fj * bj for fj, bj in zip(f, b)) for f in f_rows] for b in others]

    def good(c):
        return all(x > tol for x in c) and all(sum(ci * ni for ci, ni in zip(c, row)) < -tol for row in N)

    if good([1] * k):
        return [1] * k
    for j in range(k):
        c = [Fraction(1, 1000) if tol == 0 else 1e-3] * k
        c[j] = 1
        if good(c):
            return c
    Nf = np.array([[float(x) for x in row] for row in N])
    res = linprog(np.zeros(k), A_ub=Nf, b_ub=-np.ones(len(N)), bounds=[(1, None)] * k, method="highs")
    if res.status == 0:
        if tol:
            c = list(res.x)
        else:
            c = [Fraction(x).limit_denominator(10**9) for x in res.x]
        if good(c):
            return c
    if tol == 0:
        return _exact_separator(N, k)
    return None


def _exact_separator(N: list[list], k: int) -> list | None:
    from sympy import Matrix, Rational
    from sympy.solvers.simplex import InfeasibleLPError, linprog as exact_lp

    A = Matrix([[Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x for x in row]
                for row in N])
    try:
        _, sol = exact_lp(Matrix([0] * k), A=A, b=Matrix([-1] * len(N)),
                          bounds=[(1, None)] * k)
    except InfeasibleLPError:
        return None
    return [Fraction(int(x.p), int(x.q)) for x in sol]


def common_face_verdict(A: list[list], B: list[list], tol: float = 0) -> PairVerdict:
    """Decide whether two full-dimensional simplicial cones meet in a common face."""
    shared = shared_rays(A, B, tol)
    sa = {i for i, _ in shared}
    sb = {j for _, j in shared}
    if len(sa) != len(shared) or len(sb) != len(shared):
        return PairVerdict(False, shared, reason="repeated rays")
    if len(shared) == len(A):
        return PairVerdict(True, shared, reason="identical cones")
    fa = dual_rows(A, tol)
    f_rows = [fa[i] for i in range(len(A)) if i not in sa]
    others = [B[j] for j in range(len(B)) if j not in sb]
    c = _try_separator(f_rows, others, tol)
    if c is None:
        return PairVerdict(False, shared, reason="no separating functional: cones overlap beyond a common face")
    h = [sum(ci * f[r] for ci, f in zip(c, f_rows)) for r in range(len(A))]
    return PairVerdict(True, shared, certificate=h)


def facet_neighbours(cones: list[list[list]], tol: float = 0) -> dict[tuple[int, int], list[int]]:
    """For each facet ``(cone, dropped generator)`` list the cones across it.

    A cone is across a facet when it contains all rays of the facet and its
    remaining generator lies strictly on the other side.
    """
    out: dict[tuple[int, int], list[int]] = {}
    duals = [dual_rows(c, tol) for c in cones]
    for a, A in enumerate(cones):
        for drop in range(len(A)):
            facet = [g for j, g in enumerate(A) if j != drop]
            normal = duals[a][drop]
            hits = []
            for b, B in enumerate(cones):
                if b == a:
                    continue
                if all(any(same_ray(f, g, tol) for g in B) for f in facet):
                    rest = [g for g in B if not any(same_ray(f, g, tol) for f in facet)]
                    if len(rest) == 1 and sum(x * y for x, y in zip(normal, rest[0])) < -tol:
                        hits.append(b)
            out[(a, drop)] = hits
    return out


@dataclass
class FanVerdict:
    dim: int
    cones: int
    distinct: bool = True
    overlaps: list[tuple[int, int, str]] = field(default_factory=list)
    unpaired_facets: list[tuple[int, int]] = field(default_factory=list)
    uncovered: list[list] = field(default_factory=list)
    multiply_covered: list[list] = field(default_factory=list)
    angle_sum: float | None = None
    winding: int | None = None
    degenerate: list[int] = field(default_factory=list)

    @property
    def is_fan(self) -> bool:
        return self.distinct and not self.overlaps and not self.degenerate

    @property
    def complete(self) -> bool:
        ok = self.is_fan and not self.unpaired_facets and not self.uncovered
        if self.angle_sum is not None:
            ok = ok and abs(self.angle_sum - 2 * math.pi) <= 1e-9
        if self.winding is not None:
            ok = ok and self.winding == 1
        return ok

    def violations(self) -> list[str]:
        out = []
        if not self.distinct:
            out.append("repeated maximal cones")
        out += [f"cone {i} degenerate" for i in self.degenerate]
        out += [f"cones {a},{b}: {why}" for a, b, why in self.overlaps]
        out += [f"facet {f} of cone {c} has no neighbour" for c, f in self.unpaired_facets]
        if self.uncovered:
            out.append(f"{len(self.uncovered)} sample directions uncovered")
        if self.multiply_covered:
            out.append(f"{len(self.multiply_covered)} sample directions in two cones off their common face")
        if self.angle_sum is not None and abs(self.angle_sum - 2 * math.pi) > 1e-9:
            out.append(f"angles sum to {self.angle_sum:.12f}, not 2π")
        if self.winding is not None and self.winding != 1:
            out.append(f"arcs wind {self.winding} times around the circle")
        return out


def _cone_key(A: list[list]) -> frozenset:
    return frozenset(tuple(Fraction(x) for x in v) for v in A)


def random_directions(rng: np.random.Generator, dim: int, count: int, exact: bool) -> list[list]:
    pts = []
    while len(pts) < count:
        if exact:
            v = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-999, 1000, dim), rng.integers(1, 100, dim))]
        else:
            v = list(rng.standard_normal(dim))
        if any(x != 0 for x in v):
            pts.append(v)
    return pts


def sample_coverage(cones: list[list[list]], points: list[list], tol: float = 0,
                    duals=None) -> tuple[list, list]:
    """Points not covered, and points covered twice away from the shared face."""
    duals = [dual_rows(c, tol) for c in cones] if duals is None else duals
    uncovered, doubled = [], []
    for x in points:
        hit = [a for a, d in enumerate(duals) if contains(cones[a], x, tol, d)]
        if not hit:
            uncovered.append(x)
            continue
        for a in hit[1:]:
            shared = [cones[a][j] for _, j in shared_rays(cones[hit[0]], cones[a], tol)]
            if not _in_span_cone(shared, cones[hit[0]], x, duals[hit[0]], tol):
                doubled.append(x)
                break
    return uncovered, doubled


def _in_span_cone(shared: list[list], gens: list[list], x, dual, tol) -> bool:
    """``x`` lies in the cone spanned by ``shared`` (a face of ``gens``)."""
    coeffs = mat_vec(dual, x) if tol == 0 else list(np.asarray(dual, dtype=float) @ np.asarray(x, dtype=float))
    for j, g in enumerate(gens):
        if not any(same_ray(g, s, tol) for s in shared) and abs(coeffs[j]) > tol:
            return False
    return True


def _angle(v) -> float:
    return math.atan2(float(v[1]), float(v[0]))


def angle_accounting_2d(cones: list[list[list]], tol: float = 0) -> tuple[float, int | None]:
    """Total angle of 2-dimensional cones and, for exact data, the winding number.

    The winding number counts the cones containing a fixed reference
    direction in their half-open counterclockwise arc; it is computed
    exactly, so together with face-meeting pairs a value of 1 certifies
    that the cones tile the plane.
    """
    total = 0.0
    arcs = []
    for A in cones:
        a, b = A
        cross = a[0] * b[1] - a[1] * b[0]
        if cross < 0:
            a, b = b, a
        diff = _angle(b) - _angle(a)
        while diff <= 0:
            diff += 2 * math.pi
        while diff > 2 * math.pi:
            diff -= 2 * math.pi
        total += diff
        arcs.append((a, b))
    if tol != 0 or not _is_exact([v for A in cones for v in A]):
        return total, None
    ref = _reference_direction([v for A in cones for v in A])
    winding = 0
    for a, b in arcs:
        # ref in half-open arc [a, b): ccw from a, strictly before b
        if a[0] * ref[1] - a[1] * ref[0] >= 0 and ref[0] * b[1] - ref[1] * b[0] > 0:
            winding += 1
    return total, winding


def _reference_direction(rays: list[list]) -> tuple[Fraction, Fraction]:
    k = 1
    while True:
        ref = (Fraction(1), Fraction(1, 7 ** k + 3))
        if not any(same_ray(ref, r) for r in rays):
            return ref
        k += 1


def check_fan(cones: list[list[list]], tol: float = 0, samples: list[list] | None = None) -> FanVerdict:
    """Fan axioms and completeness for full-dimensional simplicial cones.

    Completeness is witnessed three ways: every facet has a neighbour on the
    other side (with the fan axioms this forces the union to be everything),
    sampled directions are all covered, and in the plane the arcs wind once.
    """
    dim = len(cones[0][0]) if cones else 0
    verdict = FanVerdict(dim, len(cones))
    keys = set()
    for a, A in enumerate(cones):
        try:
            r = rank([[g[i] for g in A] for i in range(dim)]) if tol == 0 else \
                np.linalg.matrix_rank(np.array(A, dtype=float), tol=tol)
        except Exception:
            r = 0
        if len(A) != dim or r != dim:
            verdict.degenerate.append(a)
        keys.add(_cone_key(A) if tol == 0 else tuple(np.round(np.array(A, dtype=float), 9).ravel()))
    verdict.distinct = len(keys) == len(cones)
    if verdict.degenerate:
        return verdict
    for a in range(len(cones)):
        for b in range(a + 1, len(cones)):
            pv = common_face_verdict(cones[a], cones[b], tol)
            if not pv.ok:
                verdict.overlaps.append((a, b, pv.reason))
    for (a, drop), hits in facet_neighbours(cones, tol).items():
        if len(hits) != 1:
            verdict.unpaired_facets.append((a, drop))
    if samples:
        verdict.uncovered, verdict.multiply_covered = sample_coverage(cones, samples, tol)
    if dim == 2:
        verdict.angle_sum, verdict.winding = angle_accounting_2d(cones, tol)
    return verdict
