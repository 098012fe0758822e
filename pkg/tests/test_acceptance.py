"""Acceptance suite.

Every criterion prints one PASS/FAIL line (collected again in the terminal
summary).  Reference numbers below are frozen four-decimal values for the
test density (x - i)**2 exp(-1.6 x**2).
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from clpaths import corpus
from clpaths.analysis import fit, flux, random_curves, sum_to_one
from clpaths.cli import main
from clpaths.contour import (Exponential, FiniteZero, InfinityRay, Monomial, PathSpec,
                             functional_table, integrate, real_line, spanning_paths)
from clpaths.density import Density, census
from clpaths.langevin import DRIFT, CLConfig, ExpectationRecord, run
from clpaths.sde_solver import (build_system, dimension_check, moments_of_functional,
                                path_moment_rank, redundancy_residual, residuals,
                                stabilized_corank)

ROOT = Path(__file__).resolve().parents[1]
LABELS = ["x", "x^2", "x^3", "x^4", "e^{-ix}", "e^{ix}", "e^{-2ix}", "e^{2ix}"]
OBS = [Monomial(1), Monomial(2), Monomial(3), Monomial(4),
       Exponential(-1), Exponential(1), Exponential(-2), Exponential(2)]

# (T_+, f)/(T_+, 1); the (T_-, f) column follows from the listed sign flips
T_PLUS = [0.7521 + 0.5613j, 0.3763 + 0.7521j, 0.1880 + 0.7653j, 0.1733 + 0.8931j,
          1.2626 - 1.0634j, 0.3754 + 0.3808j, 0.7272 - 2.3470j, -0.0186 + 0.2491j]
T_MINUS = [-0.7521 + 0.5613j, 0.3763 - 0.7521j, -0.1880 + 0.7653j, 0.1733 - 0.8931j,
           1.2626 + 1.0634j, 0.3754 - 0.3808j, 0.7272 + 2.3470j, -0.0186 - 0.2491j]
T_RHO = [0.9091j, 0.0284, 0.8523j, -0.2397, 1.7544, 0.1993, 1.8126, -0.1338]
NORM_PLUS, NORM_MINUS = -0.4817 - 0.2228j, 0.4817 - 0.2228j
# CL estimates and their errors (the error applies to the nonzero component)
CL_REF = [(0.5244j, 2e-4), (0.4129, 9e-4), (0.7562j, 9e-4), (0.2147, 2.0e-3),
          (1.2100, 6e-4), (0.3940, 2e-4), (0.6109, 2.1e-3), (-0.0064, 3e-4)]
A_PLUS, A_MINUS, A_ERR = 0.5 - 0.0243j, 0.5 + 0.0243j, 8e-4
B_REF = 1.105
# b = 1 + Im(a_+ - 1/2)/Im(w_+ - 1/2) with w_+ = 0.5 + 0.23127i, so the
# coefficient error carries over as A_ERR / 0.23127
B_ERR = A_ERR / 0.23127


def _plus_minus(norms):
    """Row indices of (T_+, T_-), identified by the sign of Re (T, 1)."""
    return (0, 1) if norms[0].real < 0 else (1, 0)


# ---------------------------------------------------------------------------
# 1. quadrature columns

def test_table1_quadrature(criterion):
    d = corpus.table1()
    t0 = time.perf_counter()
    tab = functional_table(d, spanning_paths(census(d)), OBS, normalize=True)
    rho = functional_table(d, [real_line()], OBS, normalize=True).values[0]
    dt = time.perf_counter() - t0
    ip, im = _plus_minus(tab.norms)
    dev = max(np.abs(tab.values[ip] - T_PLUS).max(), np.abs(tab.values[im] - T_MINUS).max(),
              np.abs(rho - T_RHO).max(), abs(tab.norms[ip] - NORM_PLUS),
              abs(tab.norms[im] - NORM_MINUS))
    ok = dev <= 2e-4 and dt < 10.0
    criterion(1, "Table 1 quadrature columns", ok,
              f"max deviation {dev:.1e} (tol 2e-4) over 16+8 values and 2 norms, {dt:.2f} s")
    assert ok


# ---------------------------------------------------------------------------
# 2./3. CL column and fit, from one end-to-end CLI run of configs/table1.json

@pytest.fixture(scope="module")
def table1_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("table1")
    t0 = time.perf_counter()
    code = main(["table1", str(ROOT / "configs" / "table1.json"), "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "table1.table1.json").read_text())
    return doc["result"], time.perf_counter() - t0


def test_table1_cl_column(table1_run, criterion):
    res, seconds = table1_run
    assert res["observables"] == LABELS
    worst = 0.0
    for rec, (ref, ref_err) in zip(res["cl"], CL_REF):
        mean = complex(*rec["mean"])
        err = complex(*rec["err"])
        ref = complex(ref)
        # compare each component; the reference error belongs to the nonzero one
        for got, want, e, has_ref in ((mean.real, ref.real, err.real, ref.real != 0),
                                      (mean.imag, ref.imag, err.imag, ref.imag != 0)):
            comb = math.hypot(e, ref_err) if has_ref else e
            worst = max(worst, abs(got - want) / comb)
    x_err = res["cl"][0]["err"][1]
    ok = worst <= 3.0
    criterion(2, "Table 1 CL column", ok,
              f"max |CL - ref| = {worst:.2f} combined sigma; <x> err {x_err:.1e}; "
              f"run {seconds:.0f} s")
    assert ok


def test_table1_fit(table1_run, criterion):
    res, _ = table1_run
    norms = [complex(*z) for z in res["norms"]]
    ip, im = _plus_minus(norms)
    fa = res["fit"]
    a = [complex(*z) for z in fa["coefficients"]]
    ea = [complex(*z) for z in fa["errors"]]
    dev = 0.0
    for i, ref in ((ip, A_PLUS), (im, A_MINUS)):
        dev = max(dev, abs(a[i].real - ref.real) / math.hypot(ea[i].real, A_ERR),
                  abs(a[i].imag - ref.imag) / math.hypot(ea[i].imag, A_ERR))
    total = abs(sum(a) - 1)
    b = complex(*res["fit_b"]["params"]["b"])
    eb = res["fit_b"]["param_errors"]["b"][0]
    b_dev = abs(b.real - B_REF) / math.hypot(eb, B_ERR)
    ok = dev <= 3.0 and total < 1e-12 and b_dev <= 3.0
    criterion(3, "Fit coefficients and b", ok,
              f"a_+ = {a[ip]:.4f}, a_- = {a[im]:.4f}, max {dev:.2f} sigma; "
              f"|sum a - 1| = {total:.0e}; b = {b.real:.4f}({eb:.4f}), {b_dev:.2f} sigma")
    assert ok


# ---------------------------------------------------------------------------
# 4.-6. SDE dimension, nullspace membership, redundancy

def test_dimension_equality(criterion):
    t0 = time.perf_counter()
    rows, counted_ok, stated_ok = [], True, True
    for e in corpus.entries():
        r = dimension_check(e.density)
        counted_ok &= r["n_sde"] == r["n_gamma"] == e.counted
        if e.stated is not None and r["n_sde"] != e.stated:
            stated_ok = False
            rows.append(f"{e.name} N_SDE = N_Gamma = {r['n_sde']} but listed {e.stated}")
    dt = time.perf_counter() - t0
    ok = counted_ok and stated_ok and dt < 60.0
    detail = (f"N_SDE = N_Gamma for all {len(corpus.entries())} densities: {counted_ok}; "
              f"{dt:.1f} s")
    if rows:
        detail += "; " + "; ".join(rows)
    criterion(4, "Dimension equality over the corpus", ok, detail)
    # the counting formula and the SDE corank agree everywhere; a listed
    # value that both contradict is checked separately below
    assert counted_ok and dt < 60.0


@pytest.mark.xfail(strict=True, reason="census and SDE corank both give 4 for the "
                   "periodic density: decay sectors at both +i and -i infinity")
def test_periodic_listed_dimension():
    e = next(e for e in corpus.entries() if e.name == "periodic")
    assert dimension_check(e.density)["n_sde"] == e.stated


def test_nullspace_membership(criterion):
    worst, bad = 0.0, []
    for e in corpus.entries():
        n_gamma = census(e.density).n_gamma
        _, sys, _ = stabilized_corank(e.density)
        mvs = [moments_of_functional(e.density, p, variables=sys.variables)
               for p in spanning_paths(census(e.density))]
        worst = max(worst, max(residuals(sys, mv).max() for mv in mvs))
        if path_moment_rank(e.density, mvs, sys.variables) != n_gamma:
            bad.append(e.name)
    ok = worst < 1e-6 and not bad
    criterion(5, "Nullspace membership and path-moment rank", ok,
              f"max row residual {worst:.1e}; rank != N_Gamma for {bad or 'none'}")
    assert ok


def test_redundancy(criterion):
    p = corpus.POLES
    cases = [corpus.pure_pole(1), corpus.pure_pole(2), corpus.pure_pole(3),
             Density.line([(p[0], -2)]), Density.line([(p[0], -1), (p[1], -2)]),
             Density.line([(p[2], -3)])]
    worst = 0.0
    for d in cases:
        n = -sum(alpha for _, alpha in d.poly_factors)
        assert n in (1, 2, 3)
        worst = max(worst, redundancy_residual(build_system(d, 12), n))
    ok = worst < 1e-10
    criterion(6, "Redundant row for all-pole rationals", ok,
              f"max in-span residual {worst:.1e} over {len(cases)} densities")
    assert ok


# ---------------------------------------------------------------------------
# 7. segregation at a real zero, and the off-axis fit

def test_segregation(criterion):
    a = 0.5
    d = corpus.shifted_gaussian(a)
    obs = [Monomial(1), Monomial(2), Monomial(3), Exponential(1)]
    paths = {+1: PathSpec.open(FiniteZero(a), InfinityRay(0.0)),
             -1: PathSpec.open(FiniteZero(a), InfinityRay(math.pi))}
    worst, confined, seconds = 0.0, True, 0.0
    for side, path in paths.items():
        oracle = functional_table(d, [path], obs, normalize=True).values[0]
        # a small step cap keeps single steps from jumping across the zero
        cfg = CLConfig(n_walkers=16, dt=1e-3, t_burn=5.0, t_measure=400.0, seed=1,
                       dt_cap_factor=0.01, start_points=(a + side,))
        r = run(d, obs, cfg)
        seconds += r.diagnostics["runtime_s"]
        confined &= all(side * (x - a) > 0 for x, _ in r.diagnostics["final_points"])
        # no visits in bins lying wholly on the far side of the zero
        xs, _ = r.histogram.centers()
        far = side * (xs - a) < -r.histogram.spacing[0]
        confined &= r.histogram.counts.sum(axis=(0, 2))[far].sum() == 0
        for rec, want in zip(r.records, oracle):
            for got, ref, e in ((rec.mean.real, want.real, rec.err.real),
                                (rec.mean.imag, want.imag, rec.err.imag)):
                worst = max(worst, abs(got - ref) / e if e > 0 else
                            (0.0 if abs(got - ref) < 1e-12 else math.inf))

    d2 = corpus.shifted_gaussian(0.5 + 0.5j)
    obs2 = obs + [Monomial(4), Exponential(-1)]
    tab = functional_table(d2, spanning_paths(census(d2)), obs2, normalize=True)
    r2 = run(d2, obs2, CLConfig(n_walkers=32, dt=1e-3, t_burn=10.0, t_measure=1000.0, seed=2))
    f = fit(r2.records, tab.values, parametrization=sum_to_one(2), covariance=r2.covariance)
    ok = worst <= 3.0 and confined and f.chi2_dof < 2.0
    criterion(7, "Segregation at a real zero; off-axis two-path fit", ok,
              f"real a: max {worst:.2f} sigma from the one-sided path, confined {confined}, "
              f"{seconds:.0f} s; off-axis chi2/dof {f.chi2:.1f}/{f.dof}")
    assert ok


# ---------------------------------------------------------------------------
# 8. flux of the stationary distribution

def test_flux(criterion):
    results = []
    for name, seed, lines in (("complex-gaussian", 1, []), ("periodic", 3, [0.86, 0.89])):
        d = corpus.get(name)
        cfg = CLConfig(n_walkers=32, dt=1e-3, t_burn=10.0, t_measure=1000.0, seed=seed,
                       hist_bins=(120, 120))
        h = run(d, [Monomial(1)] if not d.is_cylinder else [Exponential(1)], cfg).histogram
        vals = [flux(h, d, curve=c) for c in random_curves(h, d, 10, seed=seed + 1)]
        vals += [flux(h, d, y0=y) for y in lines]
        results.append((name, max(abs(v) / e for v, e in vals), len(vals)))
    ok = all(w <= 3.0 for _, w, _ in results)
    criterion(8, "Zero net flux through admissible curves", ok,
              "; ".join(f"{n}: {k} curves, max |flux| {w:.2f} sigma" for n, w, k in results))
    assert ok


# ---------------------------------------------------------------------------
# 9. <v> vanishes

def test_drift_expectation(criterion):
    d = corpus.fourier(1, 1.0)
    r = run(d, [DRIFT], CLConfig(n_walkers=32, dt=1e-3, t_burn=10.0, t_measure=500.0, seed=4))
    m, e = r.record("v").mean, r.record("v").err
    dev = max(abs(m.real) / e.real, abs(m.imag) / e.imag)
    ok = dev <= 3.0
    criterion(9, "<v> = 0 for exp(ix + cos x)", ok,
              f"<v> = {m.real:+.1e}{m.imag:+.1e}i ({e.real:.0e}, {e.imag:.0e}), {dev:.2f} sigma")
    assert ok


# ---------------------------------------------------------------------------
# 10. property suites, as fixed-seed sweeps

def _fd(f, z, h=1e-4):
    c = [4 / 5, -1 / 5, 4 / 105, -1 / 280]
    return sum(ck * (f(z + (k + 1) * h) - f(z - (k + 1) * h)) for k, ck in enumerate(c)) / h


def test_property_suites(criterion):
    rng = np.random.default_rng(0)

    # path deformation: move the interior vertices of an open path
    d = corpus.table1()
    base = PathSpec.open(InfinityRay(math.pi), InfinityRay(0.0), [-1 + 0j, 0j, 1 + 0j])
    deform = 0.0
    for _ in range(10):
        offs = 0.4 * (rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3))
        f = Monomial(int(rng.integers(0, 5)))
        a, b = integrate(d, base, f), integrate(d, base.perturbed(offs), f)
        deform = max(deform, abs(a - b) / abs(a))

    # drift against a finite difference of log rho
    fd = 0.0
    for e in corpus.entries():
        pts = e.density.drift_singular_points()
        for _ in range(10):
            z = complex(*rng.uniform(-1.5, 1.5, 2))
            if e.density.is_cylinder:
                near = any(abs(np.exp(1j * (z - p)) - 1) < 0.3 for p in pts)
            else:
                near = any(abs(z - p) < 0.3 for p in pts)
            if near:
                continue
            v = e.density.drift(z)
            fd = max(fd, abs(v - _fd(e.density.log_evaluate, z)) / max(1.0, abs(v)))

    # seed determinism
    cfg = CLConfig(n_walkers=4, dt=1e-3, t_burn=1.0, t_measure=20.0, seed=9)
    r1, r2 = run(d, OBS[:2], cfg), run(d, OBS[:2], cfg)
    same = all(p.mean == q.mean and p.err == q.err for p, q in zip(r1.records, r2.records))
    same &= bool(np.array_equal(r1.histogram.counts, r2.histogram.counts))

    # fit recovers known coefficients
    rec = 0.0
    for n_paths in (2, 3, 2, 3):
        B = rng.normal(size=(n_paths, 8)) + 1j * rng.normal(size=(n_paths, 8))
        coef = rng.normal(size=n_paths) + 1j * rng.normal(size=n_paths)
        coef[-1] = 1 - coef[:-1].sum()
        y = coef @ B + 1e-5 * (rng.normal(size=8) + 1j * rng.normal(size=8))
        recs = [ExpectationRecord(o, v, complex(1e-5, 1e-5), 1000, 1.0)
                for o, v in zip(OBS, y)]
        r = fit(recs, B, parametrization=sum_to_one(n_paths), n_boot=50)
        rec = max(rec, np.abs(r.coefficients - coef).max())

    ok = deform < 1e-6 and fd < 1e-8 and same and rec < 1e-3
    criterion(10, "Property suites", ok,
              f"deformation {deform:.0e}, drift vs finite difference {fd:.0e}, "
              f"seed determinism {'bit-exact' if same else 'BROKEN'}, fit recovery {rec:.0e}")
    assert ok
