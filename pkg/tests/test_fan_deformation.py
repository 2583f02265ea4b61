from fractions import Fraction

import pytest

from clusterspaces.fan_deformation import (
    NonInvertiblePhi,
    certify,
    check_facet_persistence,
    check_fan_at,
    constant_family,
    families_from_json,
    rotating_rays_family,
    sampled_family,
    tangent_family,
    uniform_grid,
)
from clusterspaces.log_space import PositivePoint, tangent_fan

from conftest import graph, opposite_fan


def test_constant_family_persists():
    fams = [constant_family([[1, 0], [0, 1]]), constant_family([[0, 1], [-1, 0]]),
            constant_family([[-1, 0], [0, -1]]), constant_family([[0, -1], [1, 0]])]
    grid = uniform_grid(0, 1, 5)
    assert check_facet_persistence(fams, grid, 0).ok
    assert certify(fams, Fraction(0), grid).certified


def test_tangent_family_endpoints():
    E = graph("A2")
    p = [Fraction(3, 2), Fraction(2, 5)]
    fams = tangent_family(E, p)
    tf = tangent_fan(E, PositivePoint(0, p))
    for f, cone in zip(fams, tf.cones):
        assert sorted(map(tuple, f.gens(1))) == sorted(map(tuple, cone))
    opp = opposite_fan("A2")
    for s, f in enumerate(fams):
        want = sorted(tuple(Fraction(int(x)) for x in col) for col in opp.mu(s, 0).T)
        assert sorted(map(tuple, f.gens(0))) == want


def test_tangent_family_certified():
    fams = tangent_family(graph("A2"), [1, 1])
    rep = certify(fams, Fraction(0), uniform_grid(0, 1, 21))
    assert rep.certified and rep.failure is None
    fine = certify(fams, Fraction(0), uniform_grid(0, 1, 41))
    assert fine.certified


def test_rotating_rays():
    fams = rotating_rays_family()
    assert check_fan_at(fams, 1 / 3, samples=200).complete
    early = check_fan_at(fams, 0.25, samples=200)
    assert early.is_fan and not early.complete
    assert not check_fan_at(fams, 0.4).is_fan
    assert not check_fan_at(fams, 0.6).is_fan
    with pytest.raises(NonInvertiblePhi):
        check_fan_at(fams, 0.5)
    rep = certify(fams, 1 / 3, uniform_grid(0.2, 0.45, 26, exact=False))
    assert not rep.certified
    fail = rep.failure
    assert fail["stage"] == "hypothesis (ii)" and fail["pair"] == ["sigma1", "sigma3"]
    assert abs(float(fail["t"]) - 1 / 3) < 0.006


def test_half_line_pair():
    fams = [constant_family([[1]], "right"), constant_family([[-1]], "left")]
    rep = certify(fams, Fraction(0), uniform_grid(0, 1, 3))
    assert rep.certified


def test_sampled_family_interpolates():
    eye = [[1, 0], [0, 1]]
    shear = [[1, 1], [0, 1]]
    f = sampled_family([[1, 0], [0, 1]], [0, 1], [eye, shear])
    assert f.exact
    assert f.matrix(Fraction(1, 2)) == [[1, Fraction(1, 2)], [0, 1]]


def test_families_from_json():
    spec = {"dim": 2, "families": [{"name": "a", "gens": [[1, 0], [0, 1]],
                                    "phi": {"kind": "samples", "ts": ["0", "1"],
                                            "matrices": [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]}}],
            "t0": "0", "grid": ["0", "1/2", "1"]}
    fams, t0, grid = families_from_json(spec)
    assert t0 == 0 and grid == [0, Fraction(1, 2), 1] and fams[0].name == "a"
    with pytest.raises(ValueError):
        families_from_json({**spec, "dim": 3})
    with pytest.raises(ValueError):
        families_from_json({**spec, "families": [{"phi": {"kind": "spline"}}]})
