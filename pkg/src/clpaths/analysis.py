"""Post-processing of CL runs: fits onto path functionals, probability-current
fluxes, and the ``<v>`` check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import TWO_PI, Density
from .errors import CurveTooClose, RankDeficientBasis

__all__ = [
    "FitResult", "Parametrization", "fit", "flux", "check_Tv", "random_curves",
    "table1_text", "sum_to_one", "b_representation",
]


# ---------------------------------------------------------------------------
# fits

@dataclass(frozen=True)
class Parametrization:
    """Affine map ``a = offset + matrix @ theta`` from free parameters to
    path coefficients.  ``real`` restricts ``theta`` to real values."""

    offset: np.ndarray
    matrix: np.ndarray
    real: bool = False
    names: tuple = ()


def free(n: int) -> Parametrization:
    return Parametrization(np.zeros(n, complex), np.eye(n, dtype=complex),
                           names=tuple(f"a{i}" for i in range(n)))


def sum_to_one(n: int) -> Parametrization:
    """``a_n = 1 - sum_{i<n} a_i``; the constraint holds exactly."""
    off = np.zeros(n, complex)
    off[-1] = 1.0
    m = np.zeros((n, n - 1), complex)
    m[:n - 1, :] = np.eye(n - 1)
    m[-1, :] = -1.0
    return Parametrization(off, m, names=tuple(f"a{i}" for i in range(n - 1)))


def b_representation() -> Parametrization:
    """``(b/2) T1 + (b/2) T2 + (1 - b) T3`` with real ``b``."""
    return Parametrization(np.array([0, 0, 1], complex),
                           np.array([[0.5], [0.5], [-1.0]], complex), real=True,
                           names=("b",))


@dataclass
class FitResult:
    coefficients: np.ndarray
    errors: np.ndarray
    covariance: np.ndarray
    chi2: float
    dof: int
    constraint_residual: float
    params: np.ndarray
    param_errors: np.ndarray
    labels: list = field(default_factory=list)
    param_names: tuple = ()

    @property
    def chi2_dof(self) -> float:
        return self.chi2 / self.dof if self.dof > 0 else float("nan")

    def predict(self, basis_values: np.ndarray) -> np.ndarray:
        return self.coefficients @ basis_values

    def to_json(self) -> dict:
        cp = lambda z: [float(np.real(z)), float(np.imag(z))]  # noqa: E731
        return {
            "paths": list(self.labels),
            "coefficients": [cp(a) for a in self.coefficients],
            "errors": [cp(e) for e in self.errors],
            "covariance": [[cp(c) for c in row] for row in self.covariance],
            "params": {n: cp(p) for n, p in zip(self.param_names, self.params)},
            "param_errors": {n: cp(p) for n, p in zip(self.param_names, self.param_errors)},
            "chi2": self.chi2, "dof": self.dof,
            "constraint_residual": self.constraint_residual,
        }


def _real_design(B, par: Parametrization):
    """Real design matrix and offset for data (Re y, Im y) given the complex
    basis matrix B (n_obs x n_paths)."""
    BM = B.T @ par.matrix          # n_obs x k (complex)
    y0 = B.T @ par.offset          # n_obs
    k = BM.shape[1]
    if par.real:
        J = np.vstack([BM.real, BM.imag])
    else:
        # theta = u + i w
        J = np.block([[BM.real, -BM.imag], [BM.imag, BM.real]])
    return J, np.concatenate([y0.real, y0.imag]), k


def _theta(x, k, real):
    return x if real else x[:k] + 1j * x[k:]


def fit(cl, basis, labels=None, normalize: bool = True, parametrization=None,
        n_boot: int = 200, seed: int = 0, rank_tol: float = 1e-10,
        covariance=None) -> FitResult:
    """Weighted least squares of CL expectations onto path functionals.

    Parameters
    ----------
    cl : list of ExpectationRecord, or (means, errors) arrays
        CL estimates per observable.
    basis : FunctionalTable or array (n_paths x n_obs)
        Functional values; columns must match the order of ``cl``.
    normalize : bool
        Impose ``sum(a) = 1`` by elimination (ignored when an explicit
        ``parametrization`` is given).
    parametrization : Parametrization, optional
        General affine constraint on the coefficients.
    covariance : array, optional
        Joint covariance of (Re y, Im y); when given, bootstrap resamples
        are drawn with these correlations (the fit weights stay diagonal).
        Observables measured on the same configurations are strongly
        correlated, and ignoring that understates the coefficient errors.

    Real and imaginary parts count as separate data points weighted by
    their own errors.  Coefficient errors come from a parametric bootstrap.
    """
    if hasattr(basis, "values"):
        labels = labels or list(basis.path_labels)
        B = np.asarray(basis.values, dtype=complex)
    else:
        B = np.asarray(basis, dtype=complex)
    if isinstance(cl, tuple):
        y, e = (np.asarray(v, dtype=complex) for v in cl)
    else:
        y = np.array([r.mean for r in cl], dtype=complex)
        e = np.array([r.err for r in cl], dtype=complex)
    if B.shape[1] != y.size:
        raise ValueError("basis columns and CL records differ in number")
    if not np.all(np.isfinite(B)):
        raise RankDeficientBasis("basis contains failed (non-finite) functionals")
    n = B.shape[0]
    par = parametrization or (sum_to_one(n) if normalize else free(n))
    J, off, k = _real_design(B, par)
    sig = np.concatenate([e.real, e.imag])
    # a component with zero error (exactly real data) borrows the other one
    other = np.concatenate([e.imag, e.real])
    sig = np.where(sig > 0, sig, other)
    sig = np.where(sig > 0, sig, 1e-12)
    data = np.concatenate([y.real, y.imag])
    Jw = J / sig[:, None]
    if J.shape[1] > 0:
        s = np.linalg.svd(Jw, compute_uv=False)
        if s[-1] <= rank_tol * s[0]:
            raise RankDeficientBasis(
                f"basis functionals are dependent (singular values {s[0]:.3g} .. {s[-1]:.3g})")
    if data.size <= J.shape[1]:
        raise ValueError("need more data points than free parameters")

    def solve(d):
        x, *_ = np.linalg.lstsq(Jw, (d - off) / sig, rcond=None)
        return x

    x = solve(data)
    resid = (J @ x + off - data) / sig
    chi2 = float(resid @ resid)
    dof = int(data.size - J.shape[1])
    theta = _theta(x, k, par.real)
    a = par.offset + par.matrix @ theta
    rng = np.random.default_rng(seed)
    if covariance is not None:
        cov_y = np.asarray(covariance, dtype=float)
        w, U = np.linalg.eigh(0.5 * (cov_y + cov_y.T))
        root = U * np.sqrt(np.clip(w, 0.0, None))
    boots_a, boots_t = [], []
    for _ in range(n_boot):
        g = rng.standard_normal(data.size)
        xb = solve(data + (root @ g if covariance is not None else sig * g))
        tb = _theta(xb, k, par.real)
        boots_t.append(tb)
        boots_a.append(par.offset + par.matrix @ tb)
    A = np.array(boots_a)
    T = np.array(boots_t)
    da = A - A.mean(axis=0)
    cov = (da.T @ da.conj()) / max(1, n_boot - 1)
    err_a = A.real.std(axis=0, ddof=1) + 1j * A.imag.std(axis=0, ddof=1)
    err_t = T.real.std(axis=0, ddof=1) + 1j * (T.imag.std(axis=0, ddof=1) if not par.real
                                               else 0.0)
    # the residual is meaningful when the parametrization preserves sum(a) = 1
    keeps_sum = abs(par.offset.sum() - 1) < 1e-14 and np.allclose(par.matrix.sum(axis=0), 0)
    cres = abs(a.sum() - 1.0) if keeps_sum else float("nan")
    return FitResult(a, err_a, cov, chi2, dof, float(cres), np.atleast_1d(theta), err_t,
                     list(labels or [f"T{i}" for i in range(n)]), par.names)


# ---------------------------------------------------------------------------
# flux

def _bilinear(field_, xs, ys, px, py, periodic_x):
    """Bilinear interpolation of a cell-centred field at points (px, py)."""
    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    fx = (px - xs[0]) / dx
    fy = (py - ys[0]) / dy
    i0 = np.floor(fx).astype(int)
    j0 = np.floor(fy).astype(int)
    tx, ty = fx - i0, fy - j0
    nx, ny = field_.shape

    def at(i, j):
        if periodic_x:
            i = i % nx
        ok = (i >= 0) & (i < nx) & (j >= 0) & (j < ny)
        out = np.zeros(np.shape(i))
        out[ok] = field_[i[ok], j[ok]]
        return out
    return ((1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0)
            + (1 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1))


def _discretize(curve, h, closed=True):
    """Midpoints and increments of a polyline sampled at about step h."""
    pts = [complex(p) for p in curve]
    if closed:
        pts = pts + [pts[0]]
    mids, dz = [], []
    for p, q in zip(pts[:-1], pts[1:]):
        m = max(1, int(math.ceil(abs(q - p) / h)))
        s = (np.arange(m) + 0.5) / m
        mids.append(p + (q - p) * s)
        dz.append(np.full(m, (q - p) / m))
    return np.concatenate(mids), np.concatenate(dz)


def _flux_one(P, hist, d, mids, dz):
    xs, ys = hist.centers()
    dx, _ = hist.spacing
    if hist.cylinder:
        dPx = (np.roll(P, -1, axis=0) - np.roll(P, 1, axis=0)) / (2 * dx)
    else:
        dPx = np.gradient(P, dx, axis=0)
    px, py = mids.real, mids.imag
    if hist.cylinder:
        px = np.mod(px - xs[0], TWO_PI) + xs[0]
    Pi = _bilinear(P, xs, ys, px, py, hist.cylinder)
    dPi = _bilinear(dPx, xs, ys, px, py, hist.cylinder)
    v = d.drift(mids)
    jx = v.real * Pi - dPi
    jy = v.imag * Pi
    return float(np.sum(jx * dz.imag - jy * dz.real))


def flux(hist, d: Density, curve=None, y0=None):
    """Net outward flux of ``j = (v_x P - dP/dx, v_y P)`` through a curve.

    ``curve`` is a closed polyline (sequence of complex vertices, taken
    counter-clockwise for an outward flux); alternatively ``y0`` selects the
    cylinder line ``y = y0`` traversed in +x.  The error is the standard
    error across walker groups.

    Raises
    ------
    CurveTooClose
        The curve passes within two grid cells of a drift singularity.
    """
    dx, dy = hist.spacing
    if y0 is not None:
        if not hist.cylinder:
            raise ValueError("horizontal lines need a cylinder histogram")
        x0 = hist.bounds[0][0]
        mids, dz = _discretize([complex(x0, y0), complex(x0 + TWO_PI, y0)], dx, closed=False)
    else:
        mids, dz = _discretize(curve, min(dx, dy), closed=True)
    margin = 2.0 * max(dx, dy)
    sing = d.drift_singular_points()
    if d.is_cylinder:
        sing = [s + TWO_PI * k for s in sing for k in (-1, 0, 1)]
    for s in sing:
        if np.min(np.abs(mids - s)) < margin:
            raise CurveTooClose(f"curve passes within {margin:.3g} of singular point {s}")
    value = _flux_one(hist.density(), hist, d, mids, dz)
    groups = [_flux_one(hist.density(g), hist, d, mids, dz)
              for g in range(hist.counts.shape[0]) if hist.counts[g].sum() > 0]
    err = float(np.std(groups, ddof=1) / math.sqrt(len(groups))) if len(groups) > 1 \
        else float("inf")
    return value, err


def random_curves(hist, d: Density, n: int, seed: int = 0, n_vertices=(5, 12)):
    """``n`` random star-shaped closed polygons inside the histogram grid,
    each at least three cells clear of drift singularities.

    Polygons are scaled separately in x and y, spanning at least ten cells
    in each direction, so thin distributions still get admissible curves.
    """
    rng = np.random.default_rng(seed)
    (x0, x1), (y0, y1) = hist.bounds
    dx, dy = hist.spacing
    cell = max(dx, dy)
    sing = d.drift_singular_points()
    if d.is_cylinder:
        sing = [s + TWO_PI * k for s in sing for k in (-1, 0, 1)]
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 10000:
            raise CurveTooClose("could not place admissible curves inside the grid")
        cx = rng.uniform(x0 + 0.2 * (x1 - x0), x1 - 0.2 * (x1 - x0))
        cy = rng.uniform(y0 + 0.3 * (y1 - y0), y1 - 0.3 * (y1 - y0))
        rx = min(cx - x0, x1 - cx) - 2 * dx
        ry = min(cy - y0, y1 - cy) - 2 * dy
        if rx < 10 * dx or ry < 10 * dy:
            continue
        m = int(rng.integers(n_vertices[0], n_vertices[1] + 1))
        ang = np.sort(rng.uniform(0, TWO_PI, m))
        rad = rng.uniform(0.3, 1.0, m)
        poly = complex(cx, cy) + rad * (rx * np.cos(ang) + 1j * ry * np.sin(ang))
        mids, _ = _discretize(poly, min(dx, dy))
        if any(np.min(np.abs(mids - s)) < 3 * cell for s in sing):
            continue
        out.append(list(poly))
    return out


# ---------------------------------------------------------------------------
# <v> check and tables

def check_Tv(result, n_sigma: float = 3.0) -> dict:
    """CL estimate of ``<v>`` and whether it vanishes within ``n_sigma``.

    ``result`` is a CLResult whose observables include the drift.
    """
    rec = result.record("v")
    m, e = rec.mean, rec.err
    ok = abs(m.real) <= n_sigma * e.real and abs(m.imag) <= n_sigma * e.imag
    finite = np.isfinite(e.real) and np.isfinite(e.imag)
    return {"mean": m, "err": e if finite else complex(np.inf, np.inf), "pass": bool(ok and finite),
            "n_sigma": n_sigma}


def _fmt(z, nd=4, err=None):
    re, im = float(np.real(z)), float(np.imag(z))
    parts = []
    if abs(re) >= 0.5 * 10 ** -nd or abs(im) < 0.5 * 10 ** -nd:
        parts.append(f"{re:+.{nd}f}")
    if abs(im) >= 0.5 * 10 ** -nd:
        parts.append(f"{'+' if im >= 0 else '-'} i{abs(im):.{nd}f}")
    s = " ".join(parts)
    if err is not None:
        big = max(abs(np.real(err)), abs(np.imag(err)))
        s += f" ({int(round(big * 10 ** nd))})"
    return s


def table1_text(labels, cl=None, fitted=None, plus=None, minus=None, rho=None, nd=4) -> str:
    """Plain-text comparison of CL estimates with path functionals.

    Columns: f, CL (with error in units of the last digit), the fitted
    combination, T+ and T- (normalized), and the exact expectation T_rho.
    """
    head = ["f", "CL", "a+T+ + a-T-", "T+", "T-", "T_rho"]
    rows = []
    for i, lab in enumerate(labels):
        row = [lab]
        row.append(_fmt(cl[i].mean, nd, cl[i].err) if cl is not None else "")
        row.append(_fmt(fitted[i], nd) if fitted is not None else "")
        row.append(_fmt(plus[i], nd) if plus is not None else "")
        row.append(_fmt(minus[i], nd) if minus is not None else "")
        row.append(_fmt(rho[i], nd) if rho is not None else "")
        rows.append(row)
    widths = [max(len(r[j]) for r in rows + [head]) for j in range(len(head))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)
