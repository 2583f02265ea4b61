import math
from fractions import Fraction

import numpy as np
import pytest

from clusterspaces.quiver_exchange import find_dt_element, tropical_edge_map
from clusterspaces.stability_space import (
    CellId,
    NotInDomain,
    StabPoint,
    _Charts,
    admissible_charts,
    check_dt_rotation,
    classify,
    flow,
    half_plane_glue_edge,
    in_chart,
    in_U,
    random_ambient_point,
    random_stab_point,
    transition_matrix,
    varpi_eval,
)

from conftest import fan, graph
from helpers import overlapping_cells, survey_cells


def test_classify_examples():
    cf = fan("A2")
    E = cf.E
    e1, e2 = cf.ray_ids[0]
    for s in (0, 3):
        top = frozenset(cf.ray_ids[s])
        assert classify(cf, StabPoint.in_chart(s, [1, 1], [1, 1])) == CellId(s, top)
    assert classify(cf, StabPoint.in_chart(0, [1, 0], [0, 1])) == CellId(0, frozenset({e2}))
    cell = classify(cf, StabPoint.in_chart(0, [-1, 0], [0, 1]))
    assert cell == CellId(E.target(0, 0), frozenset({e2}))
    assert classify(cf, StabPoint.in_chart(0, [-1, -1], [0, 0])) is not None
    assert classify(cf, StabPoint.in_chart(0, [0, 5], [0, 0])) is None


def test_in_u():
    cf = fan("A2")
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = random_ambient_point(2, rng)
        cell = classify(cf, p)
        if cell is None:
            assert not overlapping_cells(cf, p, _Charts(cf.E, p))
        else:
            assert in_U(cf, cell, p)


def test_varpi_examples():
    cf = fan("A2")
    p = StabPoint.in_chart(2, [Fraction(1, 2), 3], [2, 1])
    cell = classify(cf, p)
    w = varpi_eval(cf, cell, p)
    assert list(w.re) == [Fraction(1, 2), 3] and list(w.im) == [2, 1]
    # two admissible charts on a shared-facet sample agree
    cf3 = fan("A3")
    rng = np.random.default_rng(8)
    seen = 0
    for _ in range(400):
        p = random_stab_point(cf3, rng, boundary_rate=0.6)
        cell = classify(cf3, p)
        choices = admissible_charts(cf3, cell, p)
        if len(choices) > 1:
            seen += 1
            ref = varpi_eval(cf3, cell, p, choices[0])
            assert all(varpi_eval(cf3, cell, p, a) == ref for a in choices[1:])
    assert seen > 20
    with pytest.raises(NotInDomain):
        varpi_eval(cf, CellId(0, frozenset(cf.ray_ids[0])), StabPoint.in_chart(0, [1, 1], [-1, 1]))


def test_varpi_imaginary_part_is_boundary_coordinates():
    cf = fan("A3")
    rng = np.random.default_rng(9)
    for _ in range(100):
        p = random_stab_point(cf, rng)
        cell = classify(cf, p)
        y = in_chart(cf.E, p, cell.sigma)[1]
        assert list(varpi_eval(cf, cell, p).im) == y


def test_transition_matrices():
    cf = fan("A2")
    E = cf.E
    p = StabPoint.in_chart(0, [-1, 2], [0, 1])
    cell = classify(cf, p)
    assert np.array_equal(transition_matrix(cf, cell, cell, p), np.eye(2, dtype=np.int64))
    rep = survey_cells(fan("A3"), 400, seed=2)
    assert rep.ok and rep.matrices > 100


def test_transition_matrices_locally_constant():
    cf = fan("A2")
    a = StabPoint.in_chart(0, [-1, 2], [0, 1])
    b = StabPoint.in_chart(0, [-3, 5], [0, 2])
    ca, cb = classify(cf, a), classify(cf, b)
    assert ca == cb
    for other in overlapping_cells(cf, a, _Charts(cf.E, a)):
        if in_U(cf, other, b):
            assert np.array_equal(transition_matrix(cf, ca, other, a), transition_matrix(cf, cb, other, b))


def test_flow_scaling_and_half_turn():
    cf = fan("A3")
    p = StabPoint.in_chart(4, [1, 2, 3], [Fraction(1, 2), 1, 0])
    q = flow(cf, p, r=0.5)
    assert classify(cf, q, tol=1e-9) == classify(cf, p)
    x, y = in_chart(cf.E, q, 4)
    assert np.allclose(x, np.exp(0.5) * np.array([1, 2, 3]), atol=1e-12)
    pos = StabPoint.in_chart(4, [1, 2, 3], [0, 0, 0])
    turned = flow(cf, pos, theta=math.pi)
    x, y = in_chart(cf.E, turned, 4)
    assert np.allclose(x, [-1, -2, -3], atol=1e-9) and np.allclose(y, 0, atol=1e-9)


def test_flow_composition():
    cf = fan("A2")
    rng = np.random.default_rng(3)
    for _ in range(30):
        p = random_stab_point(cf, rng)
        t1, t2 = rng.uniform(0, 2), rng.uniform(0, 2)
        a = flow(cf, flow(cf, p, theta=t1), theta=t2)
        b = flow(cf, p, theta=t1 + t2)
        xa, ya = in_chart(cf.E, a, 0)
        xb, yb = in_chart(cf.E, b, 0)
        assert np.allclose([float(c) for c in xa + ya], [float(c) for c in xb + yb], atol=1e-9)


def test_negative_rotation_inverts():
    cf = fan("A2")
    dt = find_dt_element(cf.E)
    p = StabPoint.in_chart(1, [2, -1], [1, 3])
    back = flow(cf, flow(cf, p, theta=1.3), theta=-1.3, dt=dt)
    x, y = in_chart(cf.E, back, 1)
    assert np.allclose([float(c) for c in x + y], [2, -1, 1, 3], atol=1e-9)
    with pytest.raises(ValueError):
        flow(cf, p, theta=-1.0)


@pytest.mark.parametrize("name", ["A2", "A3"])
def test_dt_rotation(name):
    cf = fan(name)
    dt = find_dt_element(cf.E)
    rng = np.random.default_rng(0)
    samples = [random_stab_point(cf, rng) for _ in range(50)]
    rep = check_dt_rotation(cf, dt, samples)
    assert rep.ok and rep.max_error < 1e-9
    rep2 = check_dt_rotation(cf, dt, samples[:20], turns=2)
    assert rep2.ok


def test_half_plane_glue_on_facets():
    E = graph("A3")
    rng = np.random.default_rng(1)
    for _ in range(300):
        s, k = int(rng.integers(len(E))), int(rng.integers(3))
        p = random_ambient_point(3, rng, s)
        x, y = list(p.x.w), list(p.y.w)
        y[k] = Fraction(0)
        B = E.seeds[s].B
        want = [complex(a, b) for a, b in zip(tropical_edge_map(B, k, x), tropical_edge_map(B, k, y))]
        got = half_plane_glue_edge(B, k, [complex(a, b) for a, b in zip(x, y)])
        assert np.allclose(got, want, atol=1e-12)
