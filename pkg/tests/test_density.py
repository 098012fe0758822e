import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from clpaths import corpus
from clpaths.density import Density, census, n_gamma_formula
from clpaths.endpoints import EssentialApproach, FiniteZero, ImaginaryInfinity, InfinityRay
from clpaths.errors import InvalidDensity, Overflow, SingularityTooClose

coef = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)
point = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)


@st.composite
def line_densities(draw):
    factors = draw(st.lists(st.tuples(point, st.integers(-2, 3).filter(bool)), max_size=3,
                            unique_by=lambda f: f[0]))
    n_q = draw(st.integers(0, 4))
    poly = {k: draw(coef) for k in range(1, n_q + 1)}
    if n_q:
        assume(abs(poly[n_q]) > 0.1)
    principal = draw(st.lists(st.tuples(point, st.lists(coef, min_size=1, max_size=2)),
                              max_size=1))
    principal = [(b, ds) for b, ds in principal if abs(ds[-1]) > 0.1]
    return Density.line(factors, poly, principal)


@st.composite
def cylinder_densities(draw):
    gamma = draw(st.integers(-2, 2))
    factors = draw(st.lists(st.tuples(point.filter(lambda a: abs(a) > 0.2),
                                      st.integers(-2, 2).filter(bool)), max_size=2,
                                unique_by=lambda f: f[0]))
    poly = {k: draw(coef) for k in draw(st.lists(st.sampled_from([-2, -1, 1, 2]),
                                                  unique=True, max_size=2))}
    poly = {k: c for k, c in poly.items() if abs(c) > 0.1}
    return Density.cylinder(gamma, factors, poly)


def _far_from(d, z, r=0.3):
    pts = d.drift_singular_points()
    if d.is_cylinder:
        return all(abs(cmath.exp(1j * (z - p)) - 1) > r for p in pts)
    return all(abs(z - p) > r for p in pts)


def _fd_derivative(f, z, h=1e-4):
    # 8th-order central difference on log rho: no branch issues for small h
    c = [4 / 5, -1 / 5, 4 / 105, -1 / 280]
    return sum(ck * (f(z + (k + 1) * h) - f(z - (k + 1) * h)) for k, ck in enumerate(c)) / h


@given(d=st.one_of(line_densities(), cylinder_densities()), z=point)
def test_drift_matches_finite_difference(d, z):
    assume(_far_from(d, z))
    ref = _fd_derivative(d.log_evaluate, z)
    v = d.drift(z)
    assert abs(v - ref) <= 1e-8 * max(1.0, abs(v))


def test_drift_examples():
    d = corpus.table1()
    z = 0.3 + 0.2j
    assert d.drift(z) == pytest.approx(2 / (z - 1j) - 3.2 * z, abs=1e-15)
    # exp(-iz): constant drift -i
    assert corpus.winding().drift(1.7 - 0.4j) == pytest.approx(-1j)
    # (z-a) exp(-z^2/2)
    d = corpus.shifted_gaussian(0.5)
    assert d.drift(2.0) == pytest.approx(1 / 1.5 - 2.0)


def test_evaluate_table_density_at_origin():
    # (0 - i)^2 = -1 exactly
    assert corpus.table1().evaluate(0.0) == -1


def test_evaluate_large_exponent_goes_through_log_space():
    d = corpus.gaussian(1.0)
    assert d.evaluate(20.0) == pytest.approx(math.exp(-400.0), rel=1e-12)
    with pytest.raises(Overflow):
        Density.line([], {2: 1.0}).evaluate(40.0)


def test_evaluate_near_singularity_raises():
    d = corpus.pure_pole(1)
    with pytest.raises(SingularityTooClose):
        d.evaluate(corpus.POLES[0])


def test_log_evaluate_matches_evaluate():
    d = corpus.mixed()
    z = 0.4 - 0.6j
    assert cmath.exp(d.log_evaluate(z)) == pytest.approx(d.evaluate(z), rel=1e-12)


@pytest.mark.parametrize("bad", [
    lambda: Density.line([(0.5, 0)]),
    lambda: Density.cylinder(0, principal=[(0.0, [1.0])]),
    lambda: Density.cylinder(0, [(0.0, 1)]),
    lambda: Density.line([(1.0, 1), (1.0, 2)]),
])
def test_invalid_densities(bad):
    with pytest.raises(InvalidDensity):
        bad()


def test_json_round_trip():
    for e in corpus.entries():
        d = e.density
        assert Density.from_json(d.to_json()) == d


def test_malformed_json_density():
    with pytest.raises(InvalidDensity):
        Density.from_json({"mode": "line", "poly_factors": [{"alpha": 1}]})


@pytest.mark.parametrize("entry", corpus.entries(), ids=lambda e: e.name)
def test_census_matches_counting_formula(entry):
    c = census(entry.density)
    assert c.n_gamma == n_gamma_formula(entry.density) == entry.counted


def test_census_structure_mixed():
    c = census(corpus.mixed())
    kinds = [type(e) for e in c.generalized_zero_approaches]
    assert kinds.count(FiniteZero) == 1
    assert kinds.count(InfinityRay) == 4
    assert kinds.count(EssentialApproach) == 2
    assert [o for _, o in c.poles] == [2]
    assert c.n_closed == 2


def test_gaussian_directions():
    c = census(corpus.gaussian())
    angles = sorted(abs(e.angle) for e in c.generalized_zero_approaches)
    assert angles == pytest.approx([0.0, math.pi])


def test_essential_directions_decay():
    # exp(-1/(z-1)) -> 0 approaching 1 from the right
    c = census(corpus.essential())
    ess = [e for e in c.generalized_zero_approaches if isinstance(e, EssentialApproach)]
    assert len(ess) == 1
    assert abs(cmath.exp(1j * ess[0].angle) - 1) < 1e-12


def test_cylinder_approaches():
    c = census(corpus.cylinder_exp(1))
    assert [type(e) for e in c.generalized_zero_approaches] == [ImaginaryInfinity] * 2
    # periodic: decay sectors at both ends of the cylinder plus two zeroes
    c = census(corpus.periodic())
    ends = sorted(e.sign for e in c.generalized_zero_approaches
                  if isinstance(e, ImaginaryInfinity))
    assert ends == [-1, 1]
    assert len(c.finite_zeroes) == 2


def test_pure_pole_has_no_open_paths():
    for n in (1, 2, 3):
        c = census(corpus.pure_pole(n))
        assert not c.generalized_zero_approaches
        assert c.n_gamma == n


def test_reflect():
    d = corpus.mixed()
    r = d.reflect()
    for z in (0.3 + 0.9j, -1.2 + 0.1j):
        assert r.drift(z) == pytest.approx(-d.drift(-z), rel=1e-12)


def test_packed_shapes():
    pk = corpus.mixed().packed()
    assert pk["a"].shape == (2,)
    assert pk["d"].shape == (1, 2)
    assert not pk["cylinder"]
    assert np.all(pk["beta"] == [2])
