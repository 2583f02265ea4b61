"""Cells, charts and the complex-plane action on the cluster stability space.

A point is a pair ``(x, y)`` of tropical points.  It lies in the stability
space when, in some chart ``a``, every coordinate of ``x + i y`` sits in the
half-open upper half-plane ``{v > 0} ∪ {v = 0, u > 0}``.  Faces of the tropical
fan are frozensets of global ray ids (see :class:`ClusterFan`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._exact import integer_inverse
from .quiver_exchange import ExchangeGraph, GraphAutomorphism, tropical_edge_map
from .tropical_fan import ClusterFan, TropicalPoint, tropical_transition

EVENT_TOL = 1e-12
SNAP_TOL = 1e-9


class NotInDomain(ValueError):
    """The point is outside the chart domain of the requested cell."""


class StuckAtBoundary(RuntimeError):
    """Re-classification at a rotation event did not leave the current chart."""


@dataclass(frozen=True)
class StabPoint:
    x: TropicalPoint
    y: TropicalPoint

    @classmethod
    def in_chart(cls, chart: int, x: Sequence, y: Sequence) -> "StabPoint":
        return cls(TropicalPoint(chart, x), TropicalPoint(chart, y))


@dataclass(frozen=True)
class CellId:
    sigma: int
    tau: frozenset

    def to_json(self) -> dict:
        return {"sigma": self.sigma, "tau": sorted(self.tau)}


@dataclass(frozen=True)
class ComplexVector:
    re: tuple
    im: tuple

    def to_complex(self) -> np.ndarray:
        return np.array([complex(float(a), float(b)) for a, b in zip(self.re, self.im)])


def all_charts(E: ExchangeGraph, s: int, w: Sequence) -> list[list]:
    """Coordinates of one tropical point in every chart (one edge map per vertex)."""
    out: list = [None] * len(E)
    out[s] = list(w)
    queue = [s]
    while queue:
        a = queue.pop()
        for i in range(E.rank):
            b = E.target(a, i)
            if out[b] is None:
                out[b] = E.transport(a, b, out[a], tropical_edge_map, [(a, i)])
                queue.append(b)
    return out


class _Charts:
    """A stability point read in every chart."""

    def __init__(self, E: ExchangeGraph, p: StabPoint):
        self.x = all_charts(E, p.x.chart, p.x.w)
        self.y = all_charts(E, p.y.chart, p.y.w)


def _face_of(cf: ClusterFan, ys: list[list], tol: float) -> frozenset | None:
    for a in cf.E.vertices:
        if all(c >= -tol for c in ys[a]):
            return frozenset(cf.ray_ids[a][j] for j, c in enumerate(ys[a]) if c > tol)
    return None


def _q_positive(cf: ClusterFan, xs: list[list], b: int, tau: frozenset, tol: float) -> bool:
    return all(c > tol for j, c in enumerate(xs[b]) if cf.ray_ids[b][j] not in tau)


def classify(cf: ClusterFan, p: StabPoint, tol: float = 0, charts: _Charts | None = None) -> CellId | None:
    """The cell ``F(σ, τ)`` containing ``p`` or ``None`` when ``p`` is not in the space.

    ``τ`` is the face with ``y`` in its relative interior; ``σ ⊇ τ`` is the
    maximal cone with ``q_τ(x)`` in the interior of ``q_τ(σ)``, tested in the
    chart of ``σ`` where ``q_τ`` forgets the coordinates of ``τ``.
    """
    ch = _Charts(cf.E, p) if charts is None else charts
    tau = _face_of(cf, ch.y, tol)
    if tau is None:
        return None
    for b in cf.E.vertices:
        if tau <= cf.cone_rays[b] and _q_positive(cf, ch.x, b, tau, tol):
            return CellId(b, tau)
    return None


def in_half_planes(u: Sequence, v: Sequence, tol: float = 0) -> bool:
    """Every ``u_j + i v_j`` in ``{v > 0} ∪ {v = 0, u > 0}``."""
    return all(b > tol or (abs(b) <= tol and a > tol) for a, b in zip(u, v))


def chart_test(cf: ClusterFan, p: StabPoint, tol: float = 0, charts: _Charts | None = None) -> list[int]:
    """Charts in which ``p`` reads inside the product of half-planes."""
    ch = _Charts(cf.E, p) if charts is None else charts
    return [a for a in cf.E.vertices if in_half_planes(ch.x[a], ch.y[a], tol)]


def cells_containing(cf: ClusterFan, p: StabPoint, charts: _Charts | None = None) -> list[CellId]:
    """Exhaustive scan of all cells ``F(σ, τ)`` containing ``p`` (exact)."""
    ch = _Charts(cf.E, p) if charts is None else charts
    found = []
    for tau in cf.faces:
        b0 = next(b for b in cf.E.vertices if tau <= cf.cone_rays[b])
        yb = ch.y[b0]
        if not all((c > 0) if cf.ray_ids[b0][j] in tau else (c == 0) for j, c in enumerate(yb)):
            continue
        for b in cf.E.vertices:
            if tau <= cf.cone_rays[b] and _q_positive(cf, ch.x, b, tau, 0):
                found.append(CellId(b, tau))
    return found


def in_U(cf: ClusterFan, cell: CellId, p: StabPoint, charts: _Charts | None = None) -> bool:
    """``y`` in the open star of ``τ`` and ``q_τ(x)`` inside ``q_τ(σ)``."""
    ch = _Charts(cf.E, p) if charts is None else charts
    face = _face_of(cf, ch.y, 0)
    if face is None or not cell.tau <= face:
        return False
    return _q_positive(cf, ch.x, cell.sigma, cell.tau, 0)


def admissible_charts(cf: ClusterFan, cell: CellId, p: StabPoint, charts: _Charts | None = None) -> list[int]:
    ch = _Charts(cf.E, p) if charts is None else charts
    return [a for a in cf.E.vertices
            if cell.tau <= cf.cone_rays[a] and all(c >= 0 for c in ch.y[a])]


def varpi_eval(cf: ClusterFan, cell: CellId, p: StabPoint, a: int | None = None,
               charts: _Charts | None = None) -> ComplexVector:
    """Chart of the cell: ``μ^{σ}(a, s)`` applied to ``x + i y`` read in chart ``a``."""
    ch = _Charts(cf.E, p) if charts is None else charts
    if not in_U(cf, cell, p, ch):
        raise NotInDomain(f"point is not in U of cell {cell.to_json()}")
    choices = admissible_charts(cf, cell, p, ch)
    if a is None:
        a = choices[0]
    elif a not in choices:
        raise NotInDomain(f"vertex {a} is not admissible for this point")
    M = cf.mu_between(cell.sigma, a, cell.sigma)
    re = [sum(int(M[r, c]) * ch.x[a][c] for c in range(cf.n)) for r in range(cf.n)]
    im = [sum(int(M[r, c]) * ch.y[a][c] for c in range(cf.n)) for r in range(cf.n)]
    return ComplexVector(tuple(re), tuple(im))


def transition_matrix(cf: ClusterFan, cell1: CellId, cell2: CellId, p: StabPoint) -> np.ndarray:
    """Linear map between the charts of two cells near ``p``.

    With ``(σ, τ)`` the cell of ``p`` and ``s`` the vertex of ``σ`` this is
    ``μ^{σ2}(s, s2) · μ^{σ1}(s1, s)``; it is checked on ``p`` itself.
    """
    ch = _Charts(cf.E, p)
    if not (in_U(cf, cell1, p, ch) and in_U(cf, cell2, p, ch)):
        raise NotInDomain("witness is not in both chart domains")
    home = classify(cf, p, charts=ch)
    s = home.sigma
    M = cf.mu_between(cell2.sigma, s, cell2.sigma) @ cf.mu_between(cell1.sigma, cell1.sigma, s)
    w1 = varpi_eval(cf, cell1, p, charts=ch)
    w2 = varpi_eval(cf, cell2, p, charts=ch)
    for part1, part2 in ((w1.re, w2.re), (w1.im, w2.im)):
        img = [sum(int(M[r, c]) * part1[c] for c in range(cf.n)) for r in range(cf.n)]
        if img != list(part2):
            raise AssertionError("transition matrix does not match the charts")
    return M


def preserves_skew_form(cf: ClusterFan, M: np.ndarray, s1: int, s2: int) -> bool:
    B1 = cf.E.seeds[s1].B
    B2 = cf.E.seeds[s2].B
    return np.array_equal(M @ B1 @ M.T, B2)


def cell_frame(cf: ClusterFan, cell: CellId) -> dict:
    """Coordinate frame of a cell: its chart vertex and skew form."""
    return {"chart": cell.sigma, "omega": cf.E.seeds[cell.sigma].B.tolist()}


def half_plane_glue_edge(B, k: int, w: Sequence[complex]) -> list[complex]:
    """Direct half-plane gluing across edge ``k`` (experimental cross-check).

    Cases on ``Re w_k``: add ``v_kj w_k`` when it has the sign of ``v_kj``,
    leave ``w_j`` when ``Re(v_kj w_k) < 0``, and negate ``w_k`` itself.
    """
    B = np.asarray(B)
    row = [int(x) for x in B[k]]
    wk = w[k]
    out = []
    for j, x in enumerate(w):
        v = row[j]
        if j == k:
            out.append(-wk)
        elif v >= 0 and wk.real >= 0:
            out.append(x + v * wk)
        elif v <= 0 and wk.real <= 0:
            out.append(x - v * wk)
        else:
            out.append(x)
    return out


# ----------------------------------------------------------------------
# the action of C

@dataclass
class _FlowState:
    chart: int
    u: list[float]
    v: list[float]


def _snap(state: _FlowState) -> None:
    state.v = [0.0 if abs(b) <= SNAP_TOL else b for b in state.v]


def _reclassify(cf: ClusterFan, state: _FlowState) -> _FlowState:
    E = cf.E
    p = StabPoint.in_chart(state.chart, state.u, state.v)
    ch = _Charts(E, p)
    cell = classify(cf, p, tol=SNAP_TOL, charts=ch)
    if cell is None:
        raise StuckAtBoundary("point left the stability space during rotation")
    new = _FlowState(cell.sigma, list(ch.x[cell.sigma]), list(ch.y[cell.sigma]))
    _snap(new)
    return new


def _start_state(cf: ClusterFan, p: StabPoint) -> _FlowState:
    cell = classify(cf, p)
    if cell is None:
        cell = classify(cf, p, tol=SNAP_TOL)
    if cell is None:
        raise NotInDomain("point is not in the stability space")
    s = cell.sigma
    x = tropical_transition(cf.E, p.x.chart, s, p.x.w)
    y = tropical_transition(cf.E, p.y.chart, s, p.y.w)
    st = _FlowState(s, [float(c) for c in x], [float(c) for c in y])
    _snap(st)
    return st


def _rotate(cf: ClusterFan, state: _FlowState, theta: float, max_events: int = 10_000) -> _FlowState:
    remaining = float(theta)
    events = 0
    while True:
        args = []
        for a, b in zip(state.u, state.v):
            if b == 0.0 and a < 0:
                args.append(math.pi)
            else:
                args.append(math.atan2(b, a))
        exits = [max(0.0, math.pi - g) for g in args]
        delta = min(exits)
        step = min(delta, remaining)
        if step > 0:
            c, s = math.cos(step), math.sin(step)
            state.u, state.v = ([a * c - b * s for a, b in zip(state.u, state.v)],
                                [a * s + b * c for a, b in zip(state.u, state.v)])
            remaining -= step
        if delta > step + EVENT_TOL or remaining <= EVENT_TOL and delta > EVENT_TOL:
            _snap(state)
            return state
        # coordinates reaching the negative real axis (ties within EVENT_TOL)
        for j, e in enumerate(exits):
            if e - delta <= EVENT_TOL:
                state.v[j] = 0.0
        _snap(state)
        before = state.chart
        state = _reclassify(cf, state)
        if state.chart == before:
            raise StuckAtBoundary(f"re-classification stayed in chart {before}")
        events += 1
        if events > max_events:
            raise StuckAtBoundary("too many rotation events")
        if remaining <= EVENT_TOL:
            return state


def apply_automorphism(g: GraphAutomorphism, p: StabPoint) -> StabPoint:
    cx, wx = g.apply_coordinates(p.x.chart, p.x.w)
    cy, wy = g.apply_coordinates(p.y.chart, p.y.w)
    return StabPoint(TropicalPoint(cx, wx), TropicalPoint(cy, wy))


def flow(cf: ClusterFan, p: StabPoint, r: float = 0.0, theta: float = 0.0,
         dt: GraphAutomorphism | None = None) -> StabPoint:
    """Act by ``r + iθ``: scale by ``e^r`` and rotate by ``θ`` through the cells.

    Rotation is event driven: inside a chart every coordinate turns by the
    same angle until the first one reaches the negative real axis, where the
    point is re-classified and the rotation continues in the new chart.
    Negative angles are reduced to positive ones with the DT element, since a
    full turn acts as its square.
    """
    if theta < 0:
        if dt is None:
            raise ValueError("negative rotation needs the DT element")
        k = math.ceil(-theta / (2 * math.pi))
        q = flow(cf, p, r, theta + 2 * math.pi * k)
        inv = dt.inverse()
        for _ in range(2 * k):
            q = apply_automorphism(inv, q)
        return q
    state = _start_state(cf, p)
    scale = math.exp(r)
    state.u = [a * scale for a in state.u]
    state.v = [b * scale for b in state.v]
    if theta > 0:
        state = _rotate(cf, state, theta)
    return StabPoint.in_chart(state.chart, state.u, state.v)


def in_chart(E: ExchangeGraph, p: StabPoint, chart: int) -> tuple[list, list]:
    return (tropical_transition(E, p.x.chart, chart, p.x.w),
            tropical_transition(E, p.y.chart, chart, p.y.w))


@dataclass
class DTRotationReport:
    samples: int = 0
    cell_mismatches: list[int] = field(default_factory=list)
    max_error: float = 0.0
    failures: list[tuple[int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.cell_mismatches and not self.failures and self.max_error <= 1e-9


def check_dt_rotation(cf: ClusterFan, dt: GraphAutomorphism, samples: Sequence[StabPoint],
                      turns: int = 1) -> DTRotationReport:
    """Rotation by ``turns·π`` against the ``turns``-th power of the DT element."""
    rep = DTRotationReport()
    E = cf.E
    for k, p in enumerate(samples):
        rep.samples += 1
        try:
            rotated = flow(cf, p, 0.0, turns * math.pi)
        except (StuckAtBoundary, NotInDomain) as err:
            rep.failures.append((k, str(err)))
            continue
        target = p
        for _ in range(turns):
            target = apply_automorphism(dt, target)
        c1 = classify(cf, rotated, tol=SNAP_TOL)
        c2 = classify(cf, target)
        if c1 != c2:
            rep.cell_mismatches.append(k)
        x1, y1 = in_chart(E, rotated, E.base)
        x2, y2 = in_chart(E, target, E.base)
        err = max(abs(float(a) - float(b)) for a, b in zip(x1 + y1, x2 + y2))
        rep.max_error = max(rep.max_error, err)
    return rep


def random_stab_point(cf: ClusterFan, rng: np.random.Generator, boundary_rate: float = 0.3,
                      span: int = 9) -> StabPoint:
    """A random rational point of the stability space, anchored at a random chart.

    Coordinates of ``y`` are set to zero with probability ``boundary_rate``
    (then the matching ``x`` coordinate is positive), so boundary cells are
    sampled too.
    """
    n = cf.n
    s = int(rng.integers(len(cf.E)))
    u, v = [], []
    for _ in range(n):
        if rng.random() < boundary_rate:
            v.append(Fraction(0))
            u.append(Fraction(int(rng.integers(1, span + 1)), int(rng.integers(1, 5))))
        else:
            v.append(Fraction(int(rng.integers(1, span + 1)), int(rng.integers(1, 5))))
            u.append(Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, 5))))
    p = StabPoint.in_chart(s, u, v)
    base = cf.E.base
    x, y = in_chart(cf.E, p, base)
    return StabPoint.in_chart(base, x, y)


def random_ambient_point(n: int, rng: np.random.Generator, chart: int = 0, span: int = 4) -> StabPoint:
    """A random rational pair of tropical points, not necessarily in the space."""
    def coord():
        return Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, 3)))
    return StabPoint.in_chart(chart, [coord() for _ in range(n)], [coord() for _ in range(n)])
