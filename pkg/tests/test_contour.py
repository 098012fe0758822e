import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as si

from clpaths import corpus
from clpaths.contour import (Exponential, FunctionalTable, Monomial, Observable, PathSpec,
                             PowerWeight, QuadratureConfig, Weight, check_path,
                             functional_table, integrate, load_paths, dump_paths,
                             real_line, sample_path, spanning_paths)
from clpaths.density import Density, census
from clpaths.endpoints import EssentialApproach, FiniteZero, InfinityRay
from clpaths.errors import SingularityTooClose

# 30-digit reference values of int_0^{+-inf} t^2 exp(-1.6 (t+i)^2) f(t+i) dt
GAMMA_PLUS = {
    "1": -0.4816789326591969976 - 0.22276026757811285554j,
    "x^2": -0.013684060586909005614 - 0.44605075550604677889j,
    "e^{2ix}": 0.064456038395666072018 - 0.11582428139247240762j,
}

GAMMA_P = PathSpec.open(FiniteZero(1j), InfinityRay(0.0), label="gamma+")
GAMMA_M = PathSpec.open(FiniteZero(1j), InfinityRay(math.pi), label="gamma-")


def _quad_c(f, a, b):
    re = si.quad(lambda t: f(t).real, a, b, limit=200, epsabs=1e-14)[0]
    im = si.quad(lambda t: f(t).imag, a, b, limit=200, epsabs=1e-14)[0]
    return complex(re, im)


@pytest.mark.parametrize("label", list(GAMMA_PLUS))
def test_table_density_frozen_values(label):
    d = corpus.table1()
    f = Observable.parse(label)
    assert integrate(d, GAMMA_P, f) == pytest.approx(GAMMA_PLUS[label], abs=1e-12)
    # mirror path: (T-, f)(z) = -conj((T+, f)) for these f
    assert integrate(d, GAMMA_M, f) == pytest.approx(-GAMMA_PLUS[label].conjugate(), abs=1e-12)


def test_scipy_oracle_on_parametrized_path():
    d = corpus.table1()
    for f in (Monomial(3), Exponential(-1), Exponential(2)):
        ref = _quad_c(lambda t: (t ** 2 * np.exp(-1.6 * (t + 1j) ** 2) * f(t + 1j)), 0, np.inf)
        assert integrate(d, GAMMA_P, f) == pytest.approx(ref, abs=1e-10)


def test_real_line_gaussian_moments():
    d = corpus.gaussian()
    for m, exact in [(0, math.sqrt(2 * math.pi)), (2, math.sqrt(2 * math.pi)),
                     (4, 3 * math.sqrt(2 * math.pi)), (1, 0.0)]:
        assert integrate(d, real_line(), Monomial(m)) == pytest.approx(exact, abs=1e-11)


def test_pole_loop_residues():
    d = Density.line([(1.0, -1)])
    loop = PathSpec.loop(1.0, 0.5)
    assert integrate(d, loop, Monomial(0)) == pytest.approx(2j * math.pi, abs=1e-12)
    assert integrate(d, loop, PowerWeight(3)) == pytest.approx(2j * math.pi, abs=1e-12)
    assert integrate(d, loop, Weight(1.0, 1)) == pytest.approx(0.0, abs=1e-12)


def test_winding_line_fourier_moments():
    d = corpus.winding()
    line = PathSpec.closed([0j], winding=1)
    for n in range(-3, 4):
        exact = 2 * math.pi if n == 1 else 0.0
        assert integrate(d, line, PowerWeight(n, cylinder=True)) == pytest.approx(exact, abs=1e-12)


def test_essential_tail():
    d = corpus.essential()
    p = PathSpec.open(InfinityRay(0.0), EssentialApproach(1.0, 0, 0.0))
    assert integrate(d, p, Monomial(0)) == pytest.approx(-0.060720380404034809362, abs=1e-11)


def _through(points):
    return PathSpec.open(InfinityRay(math.pi), InfinityRay(0.0), points)


@given(offs=st.lists(st.complex_numbers(max_magnitude=0.6), min_size=3, max_size=3),
       m=st.integers(0, 4))
def test_deformation_invariance_open(offs, m):
    d = corpus.table1()
    base = _through([-1 + 0j, 0j, 1 + 0j])
    moved = base.perturbed(offs)
    f = Monomial(m)
    a = integrate(d, base, f)
    b = integrate(d, moved, f)
    assert abs(a - b) <= 1e-6 * max(abs(a), 1e-3)


@given(r=st.floats(0.25, 0.5), shift=st.complex_numbers(max_magnitude=0.1), k=st.integers(-2, 2))
def test_deformation_invariance_loop(r, shift, k):
    d = corpus.mixed()
    pole = -0.7 + 0.2j
    ref = integrate(d, PathSpec.loop(pole, 0.3), Exponential(k))
    # still encloses the pole, never the essential point at 0
    loop = PathSpec.loop(pole + shift, r)
    val = integrate(d, loop, Exponential(k))
    assert abs(val - ref) <= 1e-6 * abs(ref)


def test_check_path_rejects_near_singularity():
    d = corpus.pure_pole(1)
    p = PathSpec.closed([0.3 + 0.1j + 1e-5, 1 + 0j, 1j])
    with pytest.raises(SingularityTooClose):
        check_path(d, p)


def test_spanning_path_counts():
    for e in corpus.entries():
        assert len(spanning_paths(census(e.density))) == e.counted


def test_spanning_paths_give_frozen_norms():
    d = corpus.table1()
    tab = functional_table(d, spanning_paths(census(d)), [Monomial(0), Monomial(2)],
                           normalize=False)
    got = sorted(tab.values[:, 0], key=lambda z: z.real)
    assert got[0] == pytest.approx(GAMMA_PLUS["1"], abs=1e-12)
    assert got[1] == pytest.approx(-GAMMA_PLUS["1"].conjugate(), abs=1e-12)


def test_functional_table_normalization():
    d = corpus.table1()
    tab = functional_table(d, [GAMMA_P, GAMMA_M], [Monomial(0), Monomial(2)], normalize=True)
    assert np.allclose(tab.values[:, 0], 1.0)
    assert tab.values[0, 1] == pytest.approx(GAMMA_PLUS["x^2"] / GAMMA_PLUS["1"], abs=1e-12)
    assert isinstance(tab, FunctionalTable)
    blob = json.dumps(tab.to_json())
    assert "gamma+" in blob
    assert "gamma-" in tab.to_csv()


def test_observable_parse_and_labels():
    for text in ["1", "x", "x^3", "e^{ix}", "e^{-ix}", "e^{2ix}", "e^{-2ix}"]:
        o = Observable.parse(text)
        assert o.label == text
        assert Observable.from_json(o.to_json()) == o
    assert Observable.parse("z^2") == Monomial(2)
    with pytest.raises(ValueError):
        Observable.parse("sin(x)")
    assert not Exponential(2).decay_verified
    assert Exponential(-1).decay_verified


def test_observable_derivative():
    z = 0.3 - 0.7j
    for o in (Monomial(3), Exponential(-2)):
        h = 1e-6
        fd = (o(z + h) - o(z - h)) / (2 * h)
        assert o.derivative(z) == pytest.approx(fd, rel=1e-8)


def test_path_json_round_trip():
    d = corpus.mixed()
    paths = spanning_paths(census(d))
    again = load_paths(json.dumps(dump_paths(paths)))
    assert again == paths


def test_sample_path_endpoints():
    z = sample_path(corpus.table1(), GAMMA_P, n=10, extent=3.0)
    assert z[0] == pytest.approx(1j)
    assert z[-1] == pytest.approx(3 + 1j)


def test_quadrature_config_is_used():
    d = corpus.table1()
    coarse = QuadratureConfig(tol=1e-4, rtol=1e-4)
    v = integrate(d, GAMMA_P, Monomial(0), coarse)
    assert v == pytest.approx(GAMMA_PLUS["1"], abs=1e-4)
    v, err = integrate(d, GAMMA_P, Monomial(0), return_error=True)
    assert err < 1e-9
    assert cmath.isfinite(v)
