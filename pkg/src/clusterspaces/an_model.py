"""The polygon model of type A: triangulations, cross-ratios and Stokes data.

Polygon vertices ``0..m-1`` are numbered anticlockwise.  Arcs of a
triangulation are labelled ``0..n-1`` in sorted order.  Points of the
projective line are homogeneous pairs ``(a, b)`` standing for ``a/b``, so
``∞ = (1, 0)``; exact inputs stay exact.
"""

from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp, trapezoid

from .quiver_exchange import ExchangeGraph, Seed, check_exchange_matrix, recompute_tropical_data


class ArcNotPresent(KeyError):
    pass


class DegenerateQuadrilateral(ZeroDivisionError):
    pass


class RadiusTooSmall(ValueError):
    pass


class IntegratorFailure(RuntimeError):
    pass


class PathThroughRoot(ValueError):
    pass


# ----------------------------------------------------------------------
# triangulations

def _crosses(a: tuple[int, int], b: tuple[int, int]) -> bool:
    (i, j), (k, l) = a, b
    if len({i, j, k, l}) < 4:
        return False
    return (i < k < j) != (i < l < j)


@dataclass(frozen=True)
class Triangulation:
    m: int
    arcs: tuple[tuple[int, int], ...]

    def __init__(self, m: int, arcs):
        arcs = tuple(sorted(tuple(sorted((int(a), int(b)))) for a, b in arcs))
        if len(arcs) != m - 3 or len(set(arcs)) != len(arcs):
            raise ValueError(f"a triangulation of a {m}-gon has {m - 3} distinct arcs")
        for a, b in arcs:
            if not (0 <= a < b < m) or b - a in (1, m - 1):
                raise ValueError(f"{(a, b)} is not a diagonal of the {m}-gon")
        for x, y in combinations(arcs, 2):
            if _crosses(x, y):
                raise ValueError(f"arcs {x} and {y} cross")
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "arcs", arcs)

    @property
    def n(self) -> int:
        return self.m - 3

    def label(self, arc) -> int:
        arc = tuple(sorted(arc))
        try:
            return self.arcs.index(arc)
        except ValueError:
            raise ArcNotPresent(arc) from None

    def _edge(self, a: int, b: int) -> bool:
        a, b = sorted((a, b))
        return b - a in (1, self.m - 1) or (a, b) in self.arcs

    def triangles(self) -> list[tuple[int, int, int]]:
        """Triangles as increasing (hence anticlockwise) vertex triples."""
        return [t for t in combinations(range(self.m), 3)
                if self._edge(t[0], t[1]) and self._edge(t[1], t[2]) and self._edge(t[0], t[2])]

    def quadrilateral(self, arc) -> tuple[int, int, int, int]:
        """Vertices ``(a, c, b, d)`` anticlockwise around the two triangles on ``arc = (a, b)``."""
        a, b = sorted(arc)
        self.label((a, b))
        c = d = None
        for t in self.triangles():
            if a in t and b in t:
                (o,) = set(t) - {a, b}
                if a < o < b:
                    c = o
                else:
                    d = o
        return a, c, b, d

    def to_json(self) -> dict:
        return {"m": self.m, "arcs": [list(a) for a in self.arcs]}


def fan_triangulation(m: int, apex: int = 0) -> Triangulation:
    """All diagonals from one vertex."""
    return Triangulation(m, [(apex, (apex + k) % m) for k in range(2, m - 1)])


def flip(T: Triangulation, arc) -> Triangulation:
    """The other diagonal of the quadrilateral around ``arc``."""
    a, c, b, d = T.quadrilateral(arc)
    new = tuple(sorted((c, d)))
    return Triangulation(T.m, [x for x in T.arcs if x != (a, b)] + [new])


def quiver_of_triangulation(T: Triangulation) -> np.ndarray:
    """``v_ij = +1`` when arcs ``i, j`` follow each other anticlockwise in a triangle.

    Going anticlockwise around a triangle ``p < q < r`` its sides are
    ``(p,q), (q,r), (r,p)``; consecutive sides that are both arcs give an
    entry ``+1`` and the reverse pair ``-1``.
    """
    n = T.n
    v = np.zeros((n, n), dtype=np.int64)
    for p, q, r in T.triangles():
        sides = [(p, q), (q, r), (p, r)]
        for k in range(3):
            x, y = sides[k], sides[(k + 1) % 3]
            if x in T.arcs and y in T.arcs:
                i, j = T.label(x), T.label(y)
                v[i, j] += 1
                v[j, i] -= 1
    return check_exchange_matrix(v)


@dataclass
class FlipGraph:
    triangulations: list[Triangulation]
    targets: np.ndarray
    rhos: np.ndarray

    def exchange_graph(self) -> ExchangeGraph:
        """Exchange graph with the flip structure; tropical data recomputed from the base."""
        n = self.triangulations[0].n
        seeds = [Seed(quiver_of_triangulation(T), np.eye(n, dtype=np.int64)) for T in self.triangulations]
        raw = ExchangeGraph(seeds, self.targets, self.rhos, 0)
        return recompute_tropical_data(raw, seeds[0].B)


def flip_graph(m: int, start: Triangulation | None = None) -> FlipGraph:
    """Breadth-first enumeration of all triangulations reachable by flips."""
    start = start or fan_triangulation(m)
    n = m - 3
    index = {start: 0}
    order = [start]
    targets: list[list[int]] = []
    rhos: list[list[list[int]]] = []
    queue = deque([start])
    while queue:
        T = queue.popleft()
        row_t, row_r = [], []
        for i, arc in enumerate(T.arcs):
            T2 = flip(T, arc)
            if T2 not in index:
                index[T2] = len(order)
                order.append(T2)
                queue.append(T2)
            new_arc = tuple(sorted(set(T2.arcs) - set(T.arcs)))[0]
            rho = [T2.label(x) if x != arc else T2.label(new_arc) for x in T.arcs]
            row_t.append(index[T2])
            row_r.append(rho)
        targets.append(row_t)
        rhos.append(row_r)
    return FlipGraph(order, np.array(targets, dtype=np.int64).reshape(len(order), n),
                     np.array(rhos, dtype=np.int64).reshape(len(order), n, n))


# ----------------------------------------------------------------------
# cross-ratios

INF = (1, 0)


def as_projective(z) -> tuple:
    """A point of the projective line: ``"inf"``/``None`` or a finite value."""
    if z is None or (isinstance(z, str) and z.lower() in ("inf", "infinity", "∞")):
        return INF
    if isinstance(z, tuple) and len(z) == 2:
        return z
    return (z, 1)


def affine(z: tuple):
    a, b = z
    return None if b == 0 else a / b


def _det(z: tuple, w: tuple):
    return z[0] * w[1] - z[1] * w[0]


def cross_ratio(z1, z2, z3, z4):
    """Normalised so that ``CR(∞, -1, 0, x) = x``."""
    num = _det(z1, z2) * _det(z3, z4)
    den = _det(z1, z4) * _det(z2, z3)
    if den == 0 or num == 0:
        raise DegenerateQuadrilateral("quadrilateral has coincident points")
    return num / den


def check_labeled_points(points: Sequence[tuple], tol: float = 0) -> None:
    """Consecutive points distinct and at least three distinct points."""
    m = len(points)
    for j in range(m):
        if abs(_det(points[j], points[(j + 1) % m])) <= tol:
            raise DegenerateQuadrilateral(f"points {j} and {(j + 1) % m} coincide")
    distinct = []
    for z in points:
        if all(abs(_det(z, w)) > tol for w in distinct):
            distinct.append(z)
        if len(distinct) >= 3:
            return
    raise DegenerateQuadrilateral("fewer than three distinct points")


def cross_ratio_chart(points: Sequence, T: Triangulation) -> list:
    """One cross-ratio per arc, read on its quadrilateral ``(a, c, b, d)``."""
    pts = [as_projective(z) for z in points]
    if len(pts) != T.m:
        raise ValueError("need one point per polygon vertex")
    out = []
    for arc in T.arcs:
        a, c, b, d = T.quadrilateral(arc)
        out.append(cross_ratio(pts[a], pts[c], pts[b], pts[d]))
    return out


def _fourth_point(z1, z2, z3, x):
    """The ``z4`` with ``CR(z1, z2, z3, z4) = x``."""
    d12, d23 = _det(z1, z2), _det(z2, z3)
    return (d12 * z3[0] - x * d23 * z1[0], d12 * z3[1] - x * d23 * z1[1])


def _normalize(z: tuple) -> tuple:
    a, b = z
    if b == 0:
        return INF
    return (a / b, 1)


def reconstruct_points(T: Triangulation, x: Sequence) -> list[tuple]:
    """Points with the given cross-ratios, first triangle pinned to ``(∞, -1, 0)``."""
    if any(c == 0 for c in x):
        raise ValueError("coordinates must be nonzero")
    one = x[0] ** 0 if x else 1
    tris = T.triangles()
    pts: list = [None] * T.m
    p, q, r = tris[0]
    pts[p], pts[q], pts[r] = (one, 0 * one), (-one, one), (0 * one, one)
    done = {tris[0]}
    while len(done) < len(tris):
        for t in tris:
            if t in done:
                continue
            for arc in combinations(t, 2):
                if arc not in T.arcs:
                    continue
                a, c, b, d = T.quadrilateral(arc)
                xv = x[T.label(arc)]
                if pts[c] is not None and pts[d] is None and all(pts[k] is not None for k in (a, b)):
                    pts[d] = _normalize(_fourth_point(pts[a], pts[c], pts[b], xv))
                elif pts[d] is not None and pts[c] is None and all(pts[k] is not None for k in (a, b)):
                    pts[c] = _normalize(_fourth_point(pts[b], pts[d], pts[a], xv))
                else:
                    continue
                done.add(t)
                break
    return pts


def mobius(M, z: tuple) -> tuple:
    return (M[0][0] * z[0] + M[0][1] * z[1], M[1][0] * z[0] + M[1][1] * z[1])


# ----------------------------------------------------------------------
# polynomials and Stokes data

@dataclass(frozen=True)
class ApexPolynomial:
    """``x^{n+1} + a_{n-1} x^{n-1} + ... + a_0`` (no ``x^n`` term)."""

    coeffs: tuple

    def __init__(self, coeffs: Sequence):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in coeffs))

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @property
    def m(self) -> int:
        return self.n + 3

    def numpy_coeffs(self) -> np.ndarray:
        """Highest degree first, as used by ``numpy.polyval``."""
        return np.array([1, 0] + list(reversed(self.coeffs)), dtype=complex)

    def __call__(self, x):
        return np.polyval(self.numpy_coeffs(), x)

    def derivative(self, x):
        return np.polyval(np.polyder(self.numpy_coeffs()), x)

    def roots(self) -> np.ndarray:
        return np.roots(self.numpy_coeffs())


def _sqrt_along_ray(q: ApexPolynomial, theta: float, radius: float, samples: int = 4000):
    """``√q(r e^{iθ}) e^{iθ}`` on a grid from ``radius`` to 0, continued from ``radius``."""
    rs = np.linspace(radius, 0.0, samples)
    e = cmath.exp(1j * theta)
    vals = np.sqrt(q(rs * e).astype(complex)) * e
    if vals[0].real < 0:
        vals[0] = -vals[0]
    for k in range(1, samples):
        if abs(vals[k] - vals[k - 1]) > abs(vals[k] + vals[k - 1]):
            vals[k] = -vals[k]
    return rs, vals


def wkb_exponent(q: ApexPolynomial, theta: float, radius: float) -> float:
    """``Re ∫_0^R √q`` along the ray, with the decaying branch at ``R``."""
    rs, vals = _sqrt_along_ray(q, theta, radius)
    return float(trapezoid(vals.real[::-1], rs[::-1]))


def bisector_angles(m: int) -> list[float]:
    return [2 * math.pi * j / m for j in range(m)]


def subdominant_line(q: ApexPolynomial, theta: float, radius: float, rtol: float = 1e-12) -> tuple[complex, complex]:
    """``(y(0), y'(0))`` of the solution decaying along the ray ``arg x = θ``.

    Starts from WKB data at ``R e^{iθ}`` and integrates ``y'' = q y`` inward.
    """
    e = cmath.exp(1j * theta)
    x0 = radius * e
    qx = complex(q(x0))
    s = cmath.sqrt(qx)
    if (s * e).real < 0:
        s = -s
    dy = -s - complex(q.derivative(x0)) / (4 * qx)

    def rhs(r, Y):
        x = r * e
        return [e * Y[1], e * complex(q(x)) * Y[0]]

    sol = solve_ivp(rhs, (radius, 0.0), [1.0 + 0j, dy], method="DOP853", rtol=rtol, atol=1e-30)
    if not sol.success:
        raise IntegratorFailure(sol.message)
    y, yp = sol.y[0, -1], sol.y[1, -1]
    scale = max(abs(y), abs(yp))
    return (y / scale, yp / scale)


def stokes_lines(q: ApexPolynomial, radius: float, tol: float = 1e-10, min_exponent: float = 25.0,
                 jobs: int = 1) -> list[tuple[complex, complex]]:
    """Subdominant lines for every sector, as points ``(y(0), y'(0))`` of ``P^1``.

    Raises :class:`RadiusTooSmall` unless ``Re ∫ √q ≥ min_exponent`` on every
    bisector, which keeps the dominant contamination of the WKB start below
    ``e^{-2·min_exponent}``.
    """
    angles = bisector_angles(q.m)
    for j, th in enumerate(angles):
        ex = wkb_exponent(q, th, radius)
        if ex < min_exponent:
            raise RadiusTooSmall(f"sector {j}: Re ∫√q = {ex:.3g} < {min_exponent} at R={radius}")
    rtol = min(1e-10, tol)
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(jobs) as ex:
            lines = list(ex.map(lambda th: subdominant_line(q, th, radius, rtol), angles))
    else:
        lines = [subdominant_line(q, th, radius, rtol) for th in angles]
    check_labeled_points(lines, tol=1e-12)
    return lines


def pinned(points: Sequence[tuple], T: Triangulation | None = None) -> list[tuple]:
    """Möbius image with the first triangle sent to ``(∞, -1, 0)``."""
    m = len(points)
    p, q, r = (T.triangles()[0] if T is not None else (0, 1, 2))
    z1, z2, z3 = points[p], points[q], points[r]
    # M sends z1 → ∞, z3 → 0, z2 → -1
    row0 = (z3[1], -z3[0])
    row1 = (z1[1], -z1[0])
    a = row0[0] * z2[0] + row0[1] * z2[1]
    b = row1[0] * z2[0] + row1[1] * z2[1]
    M = [[-b * row0[0], -b * row0[1]], [a * row1[0], a * row1[1]]]
    return [_normalize(mobius(M, z)) for z in points[:m]]


def stokes_to_cluster(lines: Sequence[tuple], T: Triangulation) -> list:
    """Cross-ratio coordinates of the Stokes lines in the chart of ``T``."""
    check_labeled_points(lines, tol=1e-12)
    return cross_ratio_chart(lines, T)


def log_point_from_coordinates(coords: Sequence[complex], grafting_sign: int = 1) -> tuple[list, list]:
    """``(|x|, sign·arg x)`` per coordinate; the sign is a configuration choice."""
    if grafting_sign not in (1, -1):
        raise ValueError("grafting sign must be +1 or -1")
    return [abs(c) for c in coords], [grafting_sign * cmath.phase(c) for c in coords]


def rotation_generator(q: ApexPolynomial) -> ApexPolynomial:
    """``a_k ↦ ω^{k+2} a_k`` with ``ω = e^{2πi/m}``, i.e. ``ω² q(ω x)``."""
    w = cmath.exp(2j * math.pi / q.m)
    return ApexPolynomial([w ** (k + 2) * a for k, a in enumerate(q.coeffs)])


def scaling_action(s: complex, q: ApexPolynomial) -> ApexPolynomial:
    """``a_k ↦ e^{2s(m-k-2)/m} a_k``."""
    m = q.m
    return ApexPolynomial([cmath.exp(2 * s * (m - k - 2) / m) * a for k, a in enumerate(q.coeffs)])


def discriminant(q: ApexPolynomial) -> complex:
    r = q.roots()
    d = 1 + 0j
    for i, j in combinations(range(len(r)), 2):
        d *= (r[i] - r[j]) ** 2
    return d


def scaling_discriminant_factor(s: complex, q: ApexPolynomial) -> complex:
    """``e^{c(s)}`` with ``disc(q_s) = e^{c(s)} disc(q)``; ``c(s) = 2s d(d-1)/m``, ``d = n+1``."""
    d = q.n + 1
    return cmath.exp(2 * s * d * (d - 1) / q.m)


def period_integral(q: ApexPolynomial, z1: complex, z2: complex, root_tol: float = 1e-8) -> complex:
    """``∫ √q dx`` on the segment ``[z1, z2]``, branch principal at the midpoint.

    ``q = (x - z1)(x - z2) r(x)``; writing ``x = z1 + Δτ`` and
    ``τ = (1 - cos φ)/2`` removes the endpoint square roots.  The factors of
    ``√r`` are continued along the segment as ``√((x-ρ)/(mid-ρ))``, which has
    no cut on the segment when it avoids the roots ``ρ``.  Swapping the
    endpoints negates the value; the overall sign is a convention.
    """
    z1, z2 = complex(z1), complex(z2)
    scale = max(1.0, max(abs(c) for c in q.coeffs) if q.coeffs else 1.0)
    for z in (z1, z2):
        if abs(q(z)) > root_tol * scale * max(1.0, abs(z)) ** (q.n + 1):
            raise PathThroughRoot(f"{z} is not a root of q")
    if abs(q.derivative(z1)) < root_tol or abs(q.derivative(z2)) < root_tol:
        raise PathThroughRoot("endpoints must be simple roots")
    quot, rem = np.polydiv(q.numpy_coeffs(), np.poly([z1, z2]))
    others = np.roots(quot) if len(quot) > 1 else np.array([])
    delta = z2 - z1
    mid = (z1 + z2) / 2
    for rho in others:
        t = ((rho - z1) / delta).real
        dist = abs(rho - (z1 + delta * min(1.0, max(0.0, t))))
        if dist < 1e-9 * max(1.0, abs(delta)):
            raise PathThroughRoot(f"segment passes through the root {rho}")
    c = cmath.sqrt(complex(q(mid))) / (delta / 2)

    def integrand(phi: float) -> complex:
        tau = (1 - math.cos(phi)) / 2
        x = z1 + delta * tau
        p = 1 + 0j
        for rho in others:
            p *= cmath.sqrt((x - rho) / (mid - rho))
        return delta * delta * c * p * math.sin(phi) ** 2 / 4

    re = quad(lambda f: integrand(f).real, 0, math.pi, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    im = quad(lambda f: integrand(f).imag, 0, math.pi, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return complex(re, im)
