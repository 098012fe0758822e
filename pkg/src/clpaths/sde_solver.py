"""Schwinger-Dyson equations on monomials (line) or Fourier modes (cylinder).

For every test function ``f = z**n`` (or ``omega**n``) the identity
``<A f> = <f' + v f> = 0`` is reduced exactly to a linear relation among the
basic moments

* ``E_n = <z**n>`` (``<omega**n>`` on the cylinder),
* ``F_l = <1/(z - a_l)>`` for every polynomial factor,
* ``G_{m,r} = <1/(z - b_m)**r>``, ``1 <= r <= beta_m + 1``.

The nullity of the truncated system, once stable under growing truncation,
is the number of independent solutions ``N_SDE``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contour import PathSpec, PowerWeight, QuadratureConfig, Weight, integrate
from .density import Density, census
from .errors import InvalidDensity, NotStabilized

__all__ = [
    "MomentVector", "SdeSystem", "reduce_monomial_over_pole", "build_system",
    "corank", "stabilized_corank", "default_n_max", "dimension_check",
    "moments_of_functional", "residuals", "path_moment_rank",
    "redundancy_residual",
]

TOL_RANK = 1e-8


def binom(n: int, k: int) -> int:
    """Binomial coefficient valid for negative ``n`` (``k >= 0``)."""
    if k < 0:
        return 0
    if n >= 0:
        return math.comb(n, k) if k <= n else 0
    out = 1
    for i in range(k):
        out = out * (n - i)
    return out // math.factorial(k)


def _pow(b, e, one):
    """b**e for integer e (negative allowed) in any field; 0**0 == 1."""
    if e == 0:
        return one
    if e > 0:
        return b ** e
    return one / (b ** (-e))


def reduce_monomial_over_pole(n: int, b, r: int, one=1):
    """Exact partial-fraction form of ``x**n / (x - b)**r``.

    Returns ``(poly, pole)`` where ``poly`` maps powers ``j`` to coefficients
    of ``x**j`` and ``pole`` maps ``j`` to coefficients of ``(x - b)**(-j)``.

    Examples
    --------
    >>> reduce_monomial_over_pole(1, 1.0, 1)
    ({0: 1.0}, {1: 1.0})
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    poly, pole = {}, {}
    if n >= 0:
        for k in range(0, n - r + 1):
            poly[n - r - k] = binom(r + k - 1, k) * _pow(b, k, one)
        for j in range(1, r + 1):
            if n - r + j >= 0:
                c = binom(n, r - j) * _pow(b, n - r + j, one)
                if c != 0:
                    pole[j] = c
        return poly, pole
    # negative n: pole at zero of order -n
    for j in range(1, -n + 1):
        k = -n - j
        sign = -1 if r % 2 else 1
        poly[-j] = sign * binom(r + k - 1, k) * _pow(b, -r - k, one)
    for j in range(1, r + 1):
        pole[j] = binom(n, r - j) * _pow(b, n - r + j, one)
    return poly, pole


# ---------------------------------------------------------------------------
# moment vectors

@dataclass
class MomentVector:
    """Values of a functional on the basic moments.

    ``scale`` optionally maps slots to the integral of ``|rho f|`` along the
    path, the natural size against which residuals are judged.
    """

    E: dict = field(default_factory=dict)
    F: dict = field(default_factory=dict)
    G: dict = field(default_factory=dict)
    scale: dict = field(default_factory=dict)

    def get(self, slot):
        kind = slot[0]
        if kind == "E":
            return self.E[slot[1]]
        if kind == "F":
            return self.F[slot[1]]
        return self.G[(slot[1], slot[2])]

    def as_array(self, variables) -> np.ndarray:
        return np.array([self.get(s) for s in variables], dtype=complex)

    @classmethod
    def from_array(cls, variables, x) -> "MomentVector":
        mv = cls()
        for s, v in zip(variables, x):
            if s[0] == "E":
                mv.E[s[1]] = complex(v)
            elif s[0] == "F":
                mv.F[s[1]] = complex(v)
            else:
                mv.G[(s[1], s[2])] = complex(v)
        return mv

    def to_json(self) -> dict:
        cp = lambda v: [v.real, v.imag]  # noqa: E731
        return {"E": {str(k): cp(v) for k, v in sorted(self.E.items())},
                "F": {str(k): cp(v) for k, v in sorted(self.F.items())},
                "G": {f"{m},{r}": cp(v) for (m, r), v in sorted(self.G.items())}}


@dataclass(frozen=True)
class SdeSystem:
    """Rows ``sum_s coeff[s] * slot_s = 0`` for ``n`` in ``n_range``."""

    density: Density
    n_max: int
    variables: tuple
    rows: tuple
    n_range: tuple
    exact: bool = False
    stable_rows: tuple = ()

    @property
    def shape(self):
        return len(self.rows), len(self.variables)

    def matrix(self, stable: bool = False) -> np.ndarray:
        """Dense coefficient matrix.

        With ``stable=True`` the rows are those of :func:`conditioned_rows`,
        which span the same space but are far better conditioned.
        """
        rows = self.stable_rows if stable and self.stable_rows else self.rows
        idx = {s: i for i, s in enumerate(self.variables)}
        m = np.zeros(self.shape, dtype=complex)
        for i, row in enumerate(rows):
            for s, c in row.items():
                m[i, idx[s]] = complex(c)
        return m

    def row_for(self, n: int) -> dict:
        return self.rows[self.n_range.index(n)]


def _slot_maps(d: Density):
    """Where a pole of the reduction lands: point -> slot prefix."""
    fslots = {}
    for ell, (a, _) in enumerate(d.poly_factors):
        m = d.coincident_principal(a)
        fslots[ell] = ("G", m) if m is not None else ("F", ell)
    return fslots


def _ring(d: Density, exact: bool):
    if not exact:
        return complex, 1.0 + 0j, 0j
    import sympy
    from sympy.polys.domains import QQ_I

    def conv(v):
        v = complex(v)
        re = sympy.nsimplify(v.real, rational=True)
        im = sympy.nsimplify(v.imag, rational=True)
        return QQ_I.from_sympy(re + sympy.I * im)
    return conv, QQ_I.one, QQ_I.zero


def build_system(d: Density, n_max: int, exact: bool = False) -> SdeSystem:
    """Truncated SD system with rows ``n = 0..n_max`` (line) or
    ``-n_max..n_max`` (cylinder).

    With ``exact=True`` coefficients are Gaussian rationals (parameters are
    rationalized first), which removes any rank-threshold ambiguity.
    """
    if not isinstance(d, Density):
        raise InvalidDensity("build_system needs a Density")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    conv, one, zero = _ring(d, exact)
    cyl = d.is_cylinder
    fslots = _slot_maps(d)
    factors = [(conv(a), conv(al), fslots[ell]) for ell, (a, al) in enumerate(d.poly_factors)]
    qpoly = [(k, conv(c)) for k, c in d.exp_poly]
    principal = [(conv(b), [conv(x) for x in ds]) for b, ds in d.exp_principal]
    gamma = conv(d.gamma)

    def add(row, slot, c):
        row[slot] = row.get(slot, zero) + c

    def add_reduced(row, N, b, s, coef, target):
        poly, pole = reduce_monomial_over_pole(N, b, s, one)
        for j, c in poly.items():
            add(row, ("E", j), coef * c)
        for j, c in pole.items():
            if target[0] == "F":
                # factors of the prefactor only produce first-order poles
                add(row, ("F", target[1]), coef * c)
            else:
                add(row, ("G", target[1], j), coef * c)

    n_range = tuple(range(-n_max, n_max + 1)) if cyl else tuple(range(0, n_max + 1))
    rows = []
    for n in n_range:
        row = {}
        if cyl:
            add(row, ("E", n), conv(n) + gamma)
            shift = n + 1
        else:
            if n > 0:
                add(row, ("E", n - 1), conv(n))
            shift = n
        for a, al, target in factors:
            add_reduced(row, shift, a, 1, al, target)
        for k, c in qpoly:
            add(row, ("E", n + k if cyl else n + k - 1), conv(k) * c)
        for m, (b, ds) in enumerate(principal):
            for r, dr in enumerate(ds, start=1):
                if dr == zero:
                    continue
                add_reduced(row, shift, b, r + 1, -conv(r) * dr, ("G", m))
        rows.append({s: c for s, c in row.items() if bool(c)})
    variables = _variables(d, rows)
    stable = () if exact else tuple(conditioned_rows(d, rows, n_range))
    return SdeSystem(d, n_max, variables, tuple(rows), n_range, exact, stable)


def _denominator(d: Density):
    """Monic polynomial D (ascending coefficients) clearing every pole of
    the drift, and the Laurent polynomial W = v*D (or -i*v*D on the
    cylinder) as a dict power -> coefficient."""
    orders = {}
    for a, _ in d.poly_factors:
        orders[a] = max(orders.get(a, 0), 1)
    for b, ds in d.exp_principal:
        orders[b] = max(orders.get(b, 0), len(ds) + 1)
    D = np.array([1.0 + 0j])
    for p, s in orders.items():
        for _ in range(s):
            D = np.convolve(D, [-p, 1.0])

    def divided(poly, p, times):
        out = poly
        for _ in range(times):
            # synthetic division by (x - p), highest power first
            q = np.zeros(len(out) - 1, dtype=complex)
            acc = 0j
            for i in range(len(out) - 1, 0, -1):
                acc = out[i] + acc * p
                q[i - 1] = acc
            out = q
        return out

    W = {}

    def add(shift, coeffs, factor):
        for i, c in enumerate(coeffs):
            if c != 0:
                W[i + shift] = W.get(i + shift, 0j) + factor * c
    cyl = d.is_cylinder
    lift = 1 if cyl else 0  # omega/(omega - a) on the cylinder
    if cyl and d.gamma != 0:
        add(0, D, d.gamma)
    for a, al in d.poly_factors:
        add(lift, divided(D, a, 1), al)
    for k, c in d.exp_poly:
        add(k if cyl else k - 1, D, k * c)
    for b, ds in d.exp_principal:
        for r, dr in enumerate(ds, start=1):
            if dr != 0:
                add(lift, divided(D, b, r + 1), -r * dr)
    return D, W


def conditioned_rows(d: Density, rows, n_range):
    """Rows spanning the same space as ``rows`` but built from the test
    functions ``x**m * D(x)``, where D clears the poles of the drift.

    The first ``deg D`` rows are kept.  Each later row is a short recursion
    in the E moments alone, instead of carrying the geometric tails
    ``a**k`` of the pole reductions, which ruin the singular values.
    The change of basis is triangular with unit diagonal, so the row space
    is unchanged.
    """
    D, W = _denominator(d)
    deg = len(D) - 1
    cyl = d.is_cylinder
    dD = np.arange(1, len(D)) * D[1:]
    out = []
    for i, n in enumerate(n_range):
        if i < deg:
            out.append(rows[i])
            continue
        m = n - deg
        row, mag = {}, {}

        def add(power, c):
            if c != 0:
                key = ("E", power)
                row[key] = row.get(key, 0j) + c
                mag[key] = mag.get(key, 0.0) + abs(c)
        if cyl:
            for j, c in enumerate(D):
                add(m + j, m * c)
            for j, c in enumerate(dD):
                add(m + 1 + j, c)
        else:
            if m > 0:
                for j, c in enumerate(D):
                    add(m - 1 + j, m * c)
            for j, c in enumerate(dD):
                add(m + j, c)
        for j, c in W.items():
            add(m + j, c)
        # entries that cancel down to roundoff are exact zeros
        out.append({k: c for k, c in row.items() if abs(c) > 1e-12 * mag[k]})
    return out


def _variables(d: Density, rows):
    es = [s[1] for row in rows for s in row if s[0] == "E"]
    lo, hi = (min(es), max(es)) if es else (0, -1)
    out = [("E", n) for n in range(lo, hi + 1)]
    fslots = _slot_maps(d)
    out += [("F", ell) for ell, t in sorted(fslots.items()) if t[0] == "F"]
    for m, beta in enumerate(d.betas):
        out += [("G", m, r) for r in range(1, beta + 2)]
    return tuple(out)


def _log_balance(m: np.ndarray):
    """Row and column scales making the nonzero entries as close to unit
    magnitude as possible, in the least-squares sense on log|a_ij|.

    Moments grow factorially along the recursion, so max-norm scaling alone
    leaves spurious tiny singular values; balancing the logs absorbs that
    growth into the column scales.
    """
    rows, cols = np.nonzero(m)
    nr, nc = m.shape
    if rows.size == 0:
        return np.ones(nr), np.ones(nc)
    a = np.zeros((rows.size + 1, nr + nc))
    a[np.arange(rows.size), rows] = 1.0
    a[np.arange(rows.size), nr + cols] = 1.0
    a[-1, :nr] = 1.0  # fix the common shift between rows and columns
    rhs = np.concatenate([-np.log(np.abs(m[rows, cols])), [0.0]])
    x, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    return np.exp(x[:nr]), np.exp(x[nr:])


def corank(sys: SdeSystem, tol_rank: float = TOL_RANK, return_basis: bool = True):
    """Nullity of the truncated system and an orthonormal nullspace basis.

    Rows and columns are balanced before the SVD because the raw
    coefficients and the solutions span many orders of magnitude.  In exact
    mode the rank is computed over the Gaussian rationals and no basis is returned.
    """
    nvar = len(sys.variables)
    if sys.exact:
        from sympy.polys.domains import QQ_I
        from sympy.polys.matrices import DomainMatrix
        idx = {s: i for i, s in enumerate(sys.variables)}
        dense = [[QQ_I.zero] * nvar for _ in sys.rows]
        for i, row in enumerate(sys.rows):
            for s, c in row.items():
                dense[i][idx[s]] = c
        rank = DomainMatrix(dense, (len(sys.rows), nvar), QQ_I).rank() if dense else 0
        return (nvar - rank, []) if return_basis else nvar - rank
    m = sys.matrix(stable=True)
    if m.size == 0:
        return (nvar, []) if return_basis else nvar
    rs, cs = _log_balance(m)
    m = rs[:, None] * m * cs[None, :]
    rmax = np.abs(m).max(axis=1, keepdims=True)
    m = m / np.where(rmax > 0, rmax, 1.0)
    _, s, vh = np.linalg.svd(m)
    rank = int(np.sum(s > tol_rank * s[0])) if s.size and s[0] > 0 else 0
    nullity = nvar - rank
    if not return_basis:
        return nullity
    basis = []
    for v in vh[rank:].conj():
        x = v * cs
        x = x / np.linalg.norm(x)
        basis.append(MomentVector.from_array(sys.variables, x))
    return nullity, basis


def default_n_max(d: Density) -> int:
    span = (d.n_q_plus - d.n_q_minus) if d.is_cylinder else d.n_q
    return 4 * (span + sum(d.betas) + int(math.ceil(sum(abs(a) for _, a in d.poly_factors)))
                + int(math.ceil(abs(d.gamma))) + 4)


def stabilized_corank(d: Density, n_max: int | None = None, exact: bool = False,
                      tol_rank: float = TOL_RANK):
    """Corank at ``n_max`` after checking it agrees with ``n_max // 2``.

    Returns ``(n_sde, system, basis)``; raises NotStabilized on disagreement.
    """
    n_max = default_n_max(d) if n_max is None else n_max
    lo = build_system(d, n_max // 2, exact)
    hi = build_system(d, n_max, exact)
    c_lo = corank(lo, tol_rank, return_basis=False)
    c_hi, basis = corank(hi, tol_rank)
    if c_lo != c_hi:
        raise NotStabilized(f"corank {c_lo} at n_max={n_max // 2} but {c_hi} at n_max={n_max}")
    return c_hi, hi, basis


def dimension_check(d: Density, n_max_list=None, exact: bool = False,
                    tol_rank: float = TOL_RANK) -> dict:
    """Compare ``N_SDE`` over increasing truncations with the path count.

    Raises NotStabilized if the coranks at the two largest truncations differ.
    """
    if n_max_list is None:
        n0 = default_n_max(d)
        n_max_list = [n0 // 2, n0]
    n_max_list = sorted(n_max_list)
    cor = {}
    for n in n_max_list:
        cor[n] = corank(build_system(d, n, exact), tol_rank, return_basis=False)
    last = n_max_list[-2:] if len(n_max_list) > 1 else [n_max_list[0] // 2, n_max_list[0]]
    if len(n_max_list) == 1:
        cor.setdefault(last[0], corank(build_system(d, last[0], exact), tol_rank,
                                       return_basis=False))
    if cor[last[0]] != cor[last[1]]:
        raise NotStabilized(f"corank not stable across n_max {last}: "
                            f"{cor[last[0]]} vs {cor[last[1]]}")
    n_gamma = census(d).n_gamma
    n_sde = cor[last[1]]
    return {"n_gamma": n_gamma, "n_sde": n_sde, "corank_by_n_max": cor,
            "stabilized": True, "pass": n_sde == n_gamma, "exact": exact}


# ---------------------------------------------------------------------------
# functionals

def slot_weight(d: Density, slot):
    cyl = d.is_cylinder
    if slot[0] == "E":
        return PowerWeight(slot[1], cyl)
    if slot[0] == "F":
        return Weight(d.poly_factors[slot[1]][0], 1, cyl)
    return Weight(d.exp_principal[slot[1]][0], slot[2], cyl)


def moments_of_functional(d: Density, p: PathSpec, n_max: int | None = None,
                          variables=None, cfg: QuadratureConfig | None = None) -> MomentVector:
    """Quadrature values of every slot of the system built at ``n_max``."""
    if variables is None:
        variables = build_system(d, n_max if n_max is not None else default_n_max(d)).variables
    vals, scale = [], {}
    for s in variables:
        v, a = integrate(d, p, slot_weight(d, s), cfg, return_abs=True)
        vals.append(v)
        scale[s] = a
    mv = MomentVector.from_array(variables, vals)
    mv.scale = scale
    return mv


def residuals(sys: SdeSystem, mv: MomentVector) -> np.ndarray:
    """Relative residual ``|sum_s c_s m_s| / sum_s |c_s| A_s`` of each row.

    ``A_s`` is the integral of ``|rho f_s|`` when the moment vector carries
    it (quadrature values), otherwise ``|m_s|``.  Judging against ``|m_s|``
    alone would flag rows whose moments vanish by cancellation.
    """
    out = []
    for row in sys.rows:
        coef = np.array([complex(c) for c in row.values()])
        if coef.size == 0:
            out.append(0.0)
            continue
        vals = np.array([mv.get(s) for s in row])
        size = np.array([mv.scale.get(s, abs(v)) for s, v in zip(row, vals)])
        scale = np.sum(np.abs(coef) * size)
        out.append(abs(np.sum(coef * vals)) / scale if scale > 0 else 0.0)
    return np.array(out)


def path_moment_rank(d: Density, moment_vectors, variables, tol: float = 1e-8) -> int:
    """Numerical rank of the matrix whose rows are path moment vectors."""
    m = np.array([mv.as_array(variables) for mv in moment_vectors])
    cmax = np.abs(m).max(axis=0)
    m = m / np.where(cmax > 0, cmax, 1.0)
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0


def redundancy_residual(sys: SdeSystem, n: int) -> float:
    """Distance of row ``n`` from the span of rows with smaller index.

    Rows are normalized to unit 2-norm; the value is the 2-norm of the
    least-squares residual.
    """
    m = sys.matrix()
    i = sys.n_range.index(n)
    target = m[i] / np.linalg.norm(m[i])
    prev = m[:i]
    if prev.shape[0] == 0:
        return 1.0
    prev = prev / np.linalg.norm(prev, axis=1, keepdims=True).clip(min=1e-300)
    coef, *_ = np.linalg.lstsq(prev.T, target, rcond=None)
    return float(np.linalg.norm(prev.T @ coef - target))
