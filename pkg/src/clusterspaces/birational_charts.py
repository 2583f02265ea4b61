"""Exact birational transitions of the complex cluster space.

Coordinates are exact: Fractions for real points, sympy ``QQ_I`` elements
for complex ones.  The module also provides the monomial charts built from
the linear maps of the tropical fan, the separation formula for a single
edge, and the one-parameter family that degenerates transitions to
monomial maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._exact import unify_exact
from .quiver_exchange import ExchangeGraph, mutate_exchange_matrix
from .tropical_fan import ClusterFan, orthant_sign_of_rows


class PoleHit(ArithmeticError):
    """A point falls outside the domain of a birational transition."""

    def __init__(self, message: str, edge: tuple[int, int] | None = None):
        super().__init__(message)
        self.edge = edge


class NonPositiveExponent(AssertionError):
    """The deformation exponent of an oriented edge was not positive."""


@dataclass(frozen=True)
class TorusPoint:
    chart: int
    w: tuple

    def __init__(self, chart: int, w: Sequence):
        vals = unify_exact(w)
        if any(x == 0 for x in vals):
            raise ValueError("torus coordinates must be nonzero")
        object.__setattr__(self, "chart", int(chart))
        object.__setattr__(self, "w", tuple(vals))


def x_edge_transition(B, k: int, w: Sequence) -> list:
    """Cluster coordinate change across edge ``k``, in the source labels."""
    B = np.asarray(B)
    row = [int(x) for x in B[k]]
    wk = w[k]
    if wk == 0 or 1 + wk == 0:
        raise PoleHit(f"coordinate {k} equals {wk}; the transition is singular there")
    out = []
    for j, x in enumerate(w):
        if j == k:
            out.append(1 / wk)
        elif row[j] >= 0:
            out.append(x * (1 + wk) ** row[j])
        else:
            out.append(x * (1 + 1 / wk) ** row[j])
    if any(y == 0 for y in out):
        raise PoleHit("an output coordinate vanishes")
    return out


def x_transition(E: ExchangeGraph, s1: int, s2: int, w: Sequence, steps=None) -> list:
    """Composite transition, evaluated edge by edge; a pole names its edge."""
    cur = list(w)
    for s, i in (E.path(s1, s2) if steps is None else steps):
        try:
            cur = E.transport(s, E.target(s, i), cur, x_edge_transition, [(s, i)])
        except PoleHit as err:
            raise PoleHit(str(err), edge=(s, i)) from None
    return cur


def monomial_map(M, X: Sequence) -> list:
    """Torus map induced by an integer matrix: ``Y_j = prod_k X_k^{M_jk}``."""
    M = np.asarray(M)
    out = []
    for r in range(M.shape[0]):
        y = 1
        for c in range(M.shape[1]):
            e = int(M[r, c])
            if e:
                y = y * X[c] ** e
        out.append(y)
    return out


def character(n: Sequence[int], X: Sequence):
    """The monomial function ``x_n`` evaluated at ``X``."""
    y = 1
    for e, x in zip(n, X):
        if e:
            y = y * x ** int(e)
    return y


def skew_pairing(B, d: Sequence[int], n: Sequence[int]) -> int:
    B = np.asarray(B, dtype=np.int64)
    return int(np.asarray(d, dtype=np.int64) @ B @ np.asarray(n, dtype=np.int64))


@dataclass(frozen=True)
class SeparationFormula:
    """``x_n (1 + x_d^{-κ})^{⟨d, n⟩}`` as data, evaluable on chart points."""

    n: tuple[int, ...]
    d: tuple[int, ...]
    kappa: int
    power: int

    def __call__(self, X: Sequence):
        base = character(self.n, X)
        if self.power == 0:
            return base
        f = 1 + character([-self.kappa * c for c in self.d], X)
        if f == 0:
            raise PoleHit("separation factor vanishes")
        return base * f ** self.power


def psi_transition(E: ExchangeGraph, cf: ClusterFan, a: int, s1: int, i: int,
                   n: Sequence[int]) -> SeparationFormula:
    """Pullback of ``x_n`` under the monomial-chart transition across edge ``i`` of ``s1``.

    The charts are the cluster charts composed with the linear maps of the
    cone ``σ^a`` back to chart ``a``.
    """
    M = cf.mu(a, s1)
    kappa = orthant_sign_of_rows(M)[i]
    d = tuple(int(x) for x in M[i])
    return SeparationFormula(tuple(int(x) for x in n), d, kappa,
                             skew_pairing(E.seeds[a].B, d, n))


def psi_composite(E: ExchangeGraph, cf: ClusterFan, a: int, s1: int, i: int, X: Sequence) -> list:
    """Direct evaluation: monomial map out, cluster transition, monomial map back."""
    s2 = E.target(s1, i)
    Y = monomial_map(cf.mu(a, s1), X)
    Z = E.transport(s1, s2, Y, x_edge_transition, [(s1, i)])
    return monomial_map(cf.mu_inv(a, s2), Z)


def exponent_positivity(E: ExchangeGraph, cf: ClusterFan, a: int, m: Sequence[int],
                        s1: int, i: int) -> int:
    """Deformation exponent of edge ``i`` at ``s1`` after orienting it positively."""
    if any(x <= 0 for x in m):
        raise ValueError("weights must be strictly positive")
    kappa = orthant_sign_of_rows(cf.mu(a, s1))[i]
    s, j = (s1, i) if kappa > 0 else E.reverse_edge(s1, i)
    r = int((cf.mu(a, s) @ np.asarray(m, dtype=np.int64))[j])
    if r <= 0:
        raise NonPositiveExponent(f"edge {j} at vertex {s} has exponent {r}")
    return r


def deformation_exponent(cf: ClusterFan, a: int, m: Sequence[int], s: int, i: int) -> int:
    """Signed exponent ``(μ^{σ^a}(a, s) m)(i)``; its sign is the tropical sign."""
    return int((cf.mu(a, s) @ np.asarray(m, dtype=np.int64))[i])


def phi_t_edge(B, k: int, t, r: int, w: Sequence) -> list:
    """Deformed transition across edge ``k`` with signed exponent ``r``.

    For ``r > 0`` the cases read ``w_j (t^r + w_k)^{v}`` when ``v_kj >= 0``,
    ``w_j (1 + t^r/w_k)^{v}`` when ``v_kj <= 0`` and ``1/w_k`` on ``k``.  For
    ``r < 0`` the edge is negatively oriented and the mirror formula is used.
    At ``t = 1`` both agree with :func:`x_edge_transition`; at ``t = 0`` the map
    is monomial.
    """
    if r == 0:
        raise ValueError("exponent must be nonzero")
    B = np.asarray(B)
    row = [int(x) for x in B[k]]
    kappa = 1 if r > 0 else -1
    c = t ** abs(r)
    wk = w[k]
    if wk == 0:
        raise PoleHit("zero coordinate")
    out = []
    for j, x in enumerate(w):
        if j == k:
            out.append(1 / wk)
            continue
        v = row[j]
        f = 1 + c * wk ** (-kappa)
        if f == 0 and v != 0:
            raise PoleHit("deformed factor vanishes")
        y = x * f ** v if v else x
        if kappa * v >= 0 and v:
            y = y * wk ** (kappa * v)
        out.append(y)
    if any(y == 0 for y in out):
        raise PoleHit("an output coordinate vanishes")
    return out


def phi_t_transition(E: ExchangeGraph, cf: ClusterFan, a: int, m: Sequence[int],
                     s1: int, s2: int, t, w: Sequence, steps=None) -> list:
    """Deformed transition along a path, exponents read from the cone ``σ^a``."""
    cur = list(w)
    for s, i in (E.path(s1, s2) if steps is None else steps):
        r = deformation_exponent(cf, a, m, s, i)
        cur = E.transport(s, E.target(s, i), cur,
                          lambda B, k, x, r=r: phi_t_edge(B, k, t, r, x), [(s, i)])
    return cur


def x_edge_jacobian(B, k: int, w: Sequence) -> list[list]:
    """Exact Jacobian of :func:`x_edge_transition` in source labels."""
    B = np.asarray(B)
    n = len(w)
    row = [int(x) for x in B[k]]
    wk = w[k]
    J = [[0 * wk for _ in range(n)] for _ in range(n)]
    for j in range(n):
        if j == k:
            J[j][k] = -1 / wk ** 2
            continue
        v = row[j]
        if v >= 0:
            J[j][j] = (1 + wk) ** v
            J[j][k] = w[j] * v * (1 + wk) ** (v - 1) if v else 0 * wk
        else:
            J[j][j] = (1 + 1 / wk) ** v
            J[j][k] = w[j] * v * (1 + 1 / wk) ** (v - 1) * (-1 / wk ** 2)
    return J


@dataclass
class PoissonReport:
    checked: int = 0
    mismatches: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check_poisson_edge(B, k: int, points: Sequence[Sequence]) -> PoissonReport:
    """Check the transition intertwines the log-canonical brackets.

    In chart coordinates ``{x_j, x_l} = v_jl x_j x_l`` (the common factor
    ``2πi`` drops out).  The bracket is pushed through the exact Jacobian
    and compared entrywise with the bracket of the mutated matrix.
    """
    B = np.asarray(B, dtype=np.int64)
    B1 = mutate_exchange_matrix(B, k)
    n = B.shape[0]
    rep = PoissonReport()
    for p, w in enumerate(points):
        w = unify_exact(w)
        y = x_edge_transition(B, k, w)
        J = x_edge_jacobian(B, k, w)
        P = [[int(B[a, b]) * w[a] * w[b] for b in range(n)] for a in range(n)]
        for a in range(n):
            for b in range(n):
                pushed = sum((J[a][c] * P[c][d] * J[b][d] for c in range(n) for d in range(n)), 0 * w[0])
                if pushed != int(B1[a, b]) * y[a] * y[b]:
                    rep.mismatches.append((p, a, b))
        rep.checked += 1
    return rep
