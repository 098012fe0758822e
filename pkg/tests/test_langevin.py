import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clpaths import corpus
from clpaths.contour import Exponential, Monomial
from clpaths.density import Density
from clpaths.errors import Runaway, SingularHit
from clpaths.langevin import (DRIFT, CLConfig, Histogram, SdeImage, _binned_error, _kernel_walk,
                              kernel_step, run, step, with_overrides)

SMALL = CLConfig(n_walkers=8, dt=1e-3, t_burn=2.0, t_measure=60.0, seed=5, n_groups=4,
                 hist_bins=(40, 40))


def test_step_examples():
    assert step(0j, 0.01, 1.0, lambda z: -z) == pytest.approx(math.sqrt(0.02))
    assert step(1 + 1j, 0.5, 0.0, lambda z: -z) == pytest.approx(0.5 + 0.5j)
    d = corpus.table1()
    z = 0.2 + 0.3j
    assert step(z, 1e-3, -0.5, d) == pytest.approx(z + d.drift(z) * 1e-3 - 0.5 * math.sqrt(2e-3))


@given(x=st.floats(-2, 2), y=st.floats(-1.5, 1.5), xi=st.floats(-3, 3),
       name=st.sampled_from(["mixed", "essential", "periodic", "cyl+", "pole3", "two-zero"]))
def test_kernel_drift_matches_density(x, y, xi, name):
    d = corpus.get(name)
    z = complex(x, y)
    if d.is_cylinder:
        far = all(abs(np.exp(1j * (z - p)) - 1) > 0.2 for p in d.drift_singular_points())
    else:
        far = all(abs(z - p) > 0.2 for p in d.drift_singular_points())
    if not far:
        return
    got = kernel_step(d, z, 1e-3, xi)
    ref = step(z, 1e-3, xi, d)
    if d.is_cylinder:
        ref = complex(ref.real % (2 * math.pi), ref.imag)
    assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))


def test_kernel_adaptive_step():
    d = corpus.gaussian()  # v = -z
    # |v|^2 dt = 10 > cap = 0.1, so h = cap / |v|^2 = 1e-5
    assert kernel_step(d, 100.0, 1e-3, 0.0, cap=0.1) == pytest.approx(100.0 - 1e-3)
    assert kernel_step(d, 0.1, 1e-3, 0.0, cap=0.1) == pytest.approx(0.1 - 1e-4)


def test_seed_determinism_bit_exact():
    d = corpus.table1()
    obs = [Monomial(1), Exponential(-1)]
    a = run(d, obs, SMALL)
    b = run(d, obs, SMALL)
    for ra, rb in zip(a.records, b.records):
        assert ra.mean == rb.mean and ra.err == rb.err
    assert np.array_equal(a.histogram.counts, b.histogram.counts)
    c = run(d, obs, with_overrides(SMALL, seed=6))
    assert c.records[0].mean != a.records[0].mean


def test_thread_count_does_not_change_results():
    d = corpus.table1()
    a = run(d, [Monomial(2)], with_overrides(SMALL, n_threads=1))
    b = run(d, [Monomial(2)], with_overrides(SMALL, n_threads=3))
    assert a.records[0].mean == b.records[0].mean
    assert np.array_equal(a.histogram.counts, b.histogram.counts)


def test_noise_chunking_does_not_change_results():
    d = corpus.gaussian()
    a = run(d, [Monomial(2)], SMALL)
    b = run(d, [Monomial(2)], with_overrides(SMALL, chunk=1000))
    assert a.records[0].mean == b.records[0].mean


def test_gaussian_moments():
    cfg = with_overrides(SMALL, n_walkers=16, t_measure=400.0)
    r = run(corpus.gaussian(), [Monomial(2), Monomial(4)], cfg)
    x2, x4 = r.records
    assert abs(x2.mean.real - 1.0) < 4 * x2.err.real
    assert abs(x4.mean.real - 3.0) < 4 * x4.err.real
    assert x2.mean.imag == 0.0


def test_complex_gaussian_moment():
    # exp(-sigma z^2/2), sigma = 1 + i:  <z^2> = 1/sigma
    cfg = with_overrides(SMALL, n_walkers=16, t_measure=400.0)
    r = run(corpus.gaussian(0.5 + 0.5j), [Monomial(2)], cfg)
    rec = r.records[0]
    exact = 1 / (1 + 1j)
    assert abs(rec.mean.real - exact.real) < 4 * rec.err.real
    assert abs(rec.mean.imag - exact.imag) < 4 * rec.err.imag
    assert rec.plateau


def test_sde_image_vanishes():
    cfg = with_overrides(SMALL, n_walkers=16, t_measure=200.0)
    r = run(corpus.table1(), [SdeImage(Monomial(2)), DRIFT], cfg)
    rec = r.record("A[x^2]")
    assert abs(rec.mean.real) < 4 * rec.err.real
    assert abs(rec.mean.imag) < 4 * rec.err.imag


def test_decay_flag_is_carried():
    r = run(corpus.table1(), [Exponential(2), Exponential(1)], SMALL)
    assert [rec.decay_verified for rec in r.records] == [False, True]


def test_runaway_is_reported():
    d = Density.line([], {1: 2j})  # constant drift 2i
    with pytest.raises(Runaway) as exc:
        run(d, [Monomial(1)], with_overrides(SMALL, y_cap=5.0))
    assert exc.value.diagnostics["y_cap"] == 5.0


def test_histogram_round_trip(tmp_path):
    r = run(corpus.gaussian(0.5 + 0.5j), [Monomial(1)], SMALL)
    h = r.histogram
    P = h.density()
    dx, dy = h.spacing
    assert P.sum() * dx * dy == pytest.approx(1 - h.overflow / (h.counts.sum() + h.overflow))
    f = tmp_path / "h.bin"
    h.save(f, extra={"note": "x"})
    g = Histogram.load(f)
    assert np.array_equal(g.counts, h.counts)
    assert g.bounds == h.bounds


def test_cylinder_histogram_spans_period():
    r = run(corpus.fourier(), [Exponential(1)], SMALL)
    (x0, x1), _ = r.histogram.bounds
    assert (x0, x1) == (0.0, pytest.approx(2 * math.pi))


def test_binned_error_iid_and_correlated():
    rng = np.random.default_rng(0)
    walkers, bins, per = 8, 256, 20
    x = rng.standard_normal((walkers, bins * per))
    sums = x.reshape(walkers, bins, per).sum(axis=2)
    counts = np.full((walkers, bins), per)
    err, plateau, _ = _binned_error(sums, counts)
    assert err == pytest.approx(1 / math.sqrt(x.size), rel=0.15)
    assert plateau
    # AR(1) with phi = 0.9: error inflated by sqrt((1 + phi) / (1 - phi))
    phi = 0.9
    y = np.empty_like(x)
    y[:, 0] = x[:, 0]
    for t in range(1, y.shape[1]):
        y[:, t] = phi * y[:, t - 1] + math.sqrt(1 - phi ** 2) * x[:, t]
    sums = y.reshape(walkers, bins, per).sum(axis=2)
    err, _, _ = _binned_error(sums, counts)
    assert err == pytest.approx(math.sqrt(19) / math.sqrt(x.size), rel=0.3)


@pytest.mark.parametrize("kw", [dict(dt=0.0), dict(n_walkers=0), dict(meas_interval=1e-6),
                                dict(start_points=())])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        CLConfig(**kw)


def test_config_json():
    js = SMALL.to_json()
    assert js["start_points"] == [[0.0, 0.0]]
    assert CLConfig(**dict(js, start_points=[complex(*p) for p in js["start_points"]])) == SMALL


def test_exact_singular_hit_is_rejected():
    d = Density.line([(0, 1)], {2: -0.5})  # v = 1/z - z, zero drift at z = 1
    # with dt = 0.5 the first noise value -1 lands exactly on z = 0
    st = _kernel_walk(d, 1.0 + 0j, 0.5, [-1.0, 0.5, 0.0], None, 0.75)
    assert st[8] == 1  # one rejected step
    assert st[5] == 2  # two accepted steps
    z = 1.5
    assert complex(st[0], st[1]) == pytest.approx(z + 0.5 * (1 / z - z))
    assert st[2] == pytest.approx(1.0)


def test_start_on_singular_point_raises():
    with pytest.raises(SingularHit):
        kernel_step(Density.line([(0.5, 1)], {2: -0.5}), 0.5 + 0j, 1e-3)
