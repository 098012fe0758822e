"""Rational-type complex densities.

A density is given in factored form.  In line mode

    rho(z) = prod_l (z - a_l)**alpha_l * exp(Q(z) + R_s(z)),

with ``Q`` a polynomial and ``R_s`` a sum of principal parts
``d_{m,r} / (z - b_m)**r``.  In cylinder mode the same structure is written in
``omega = exp(iz)`` with an extra prefactor ``omega**gamma`` and ``Q`` a
Laurent polynomial.  The factored form is canonical: nothing is simplified
across factors.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .endpoints import (EssentialApproach, FiniteZero, ImaginaryInfinity,
                        InfinityRay, wrap_angle)
from .errors import InvalidDensity, Overflow, SingularityTooClose

EPS_SING = 1e-12
LOG_MAX = 709.0
LOG_THRESHOLD = 300.0
TWO_PI = 2.0 * math.pi


class Mode(str, Enum):
    LINE = "line"
    CYLINDER = "cylinder"


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InvalidDensity(f"complex numbers are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _as_int(v, what) -> int:
    if isinstance(v, bool) or int(v) != v:
        raise InvalidDensity(f"{what} must be an integer, got {v!r}")
    return int(v)


@dataclass(frozen=True)
class Density:
    mode: Mode = Mode.LINE
    poly_factors: tuple = ()
    exp_poly: tuple = ()
    exp_principal: tuple = ()
    gamma: int = 0

    def __post_init__(self):
        mode = Mode(self.mode)
        pf = tuple((_as_complex(a), _as_int(al, "alpha")) for a, al in self.poly_factors)
        items = self.exp_poly.items() if isinstance(self.exp_poly, dict) else self.exp_poly
        poly = {}
        for k, c in items:
            k = _as_int(k, "exp_poly power")
            poly[k] = poly.get(k, 0j) + _as_complex(c)
        poly = tuple(sorted((k, c) for k, c in poly.items() if c != 0))
        pr = tuple((_as_complex(b), tuple(_as_complex(x) for x in ds))
                   for b, ds in self.exp_principal)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "poly_factors", pf)
        object.__setattr__(self, "exp_poly", poly)
        object.__setattr__(self, "exp_principal", pr)
        object.__setattr__(self, "gamma", _as_int(self.gamma, "gamma"))
        self._validate()

    def _validate(self):
        avals = [a for a, _ in self.poly_factors]
        bvals = [b for b, _ in self.exp_principal]
        if len(set(avals)) != len(avals):
            raise InvalidDensity("poly factor locations a_l must be pairwise distinct")
        if len(set(bvals)) != len(bvals):
            raise InvalidDensity("principal-part locations b_m must be pairwise distinct")
        for a, al in self.poly_factors:
            if al == 0:
                raise InvalidDensity("exponents alpha_l must be nonzero")
        for b, ds in self.exp_principal:
            if len(ds) == 0 or ds[-1] == 0:
                raise InvalidDensity(f"principal part at {b} needs a nonzero leading coefficient")
        if self.mode is Mode.LINE:
            if self.gamma != 0:
                raise InvalidDensity("gamma is only meaningful in cylinder mode")
            if any(k < 0 for k, _ in self.exp_poly):
                raise InvalidDensity("line-mode exponent polynomial has no negative powers")
        else:
            if any(a == 0 for a in avals):
                raise InvalidDensity("cylinder mode: a_l = 0 is expressed through gamma")
            if any(b == 0 for b in bvals):
                raise InvalidDensity("cylinder mode: b_m must be nonzero")

    # -- constructors -----------------------------------------------------

    @classmethod
    def line(cls, factors=(), exp_poly=None, principal=()):
        return cls(Mode.LINE, tuple(factors), dict(exp_poly or {}), tuple(principal))

    @classmethod
    def cylinder(cls, gamma=0, factors=(), exp_poly=None, principal=()):
        return cls(Mode.CYLINDER, tuple(factors), dict(exp_poly or {}),
                   tuple(principal), gamma)

    # -- structure --------------------------------------------------------

    @property
    def is_cylinder(self) -> bool:
        return self.mode is Mode.CYLINDER

    @property
    def poly_dict(self) -> dict:
        return dict(self.exp_poly)

    @property
    def n_q(self) -> int:
        """Degree of Q (line mode)."""
        ks = [k for k, _ in self.exp_poly]
        return max(ks) if ks else 0

    @property
    def n_q_plus(self) -> int:
        ks = [k for k, _ in self.exp_poly]
        return max(ks) if ks else 0

    @property
    def n_q_minus(self) -> int:
        ks = [k for k, _ in self.exp_poly]
        return min(ks) if ks else 0

    @property
    def betas(self) -> tuple:
        return tuple(len(ds) for _, ds in self.exp_principal)

    def coincident_principal(self, a) -> int | None:
        """Index m with b_m == a, if any."""
        for m, (b, _) in enumerate(self.exp_principal):
            if b == a:
                return m
        return None

    def to_z(self, w) -> complex:
        """z-plane representative (Re z in [0, 2pi)) of an omega-plane point."""
        z = -1j * cmath.log(w)
        return complex(z.real % TWO_PI, z.imag)

    def singular_points(self) -> list:
        """z-plane locations of the poles and essential singularities of rho."""
        pts = [a for a, al in self.poly_factors
               if al < 0 and self.coincident_principal(a) is None]
        pts += [b for b, _ in self.exp_principal]
        if self.is_cylinder:
            pts = [self.to_z(p) for p in pts]
        return pts

    def zero_points(self) -> list:
        pts = [a for a, al in self.poly_factors
               if al > 0 and self.coincident_principal(a) is None]
        if self.is_cylinder:
            pts = [self.to_z(p) for p in pts]
        return pts

    def drift_singular_points(self) -> list:
        pts = [a for a, _ in self.poly_factors] + [b for b, _ in self.exp_principal]
        if self.is_cylinder:
            pts = [self.to_z(p) for p in pts]
        return pts

    # -- evaluation -------------------------------------------------------

    def _variable(self, z):
        return np.exp(1j * z) if self.is_cylinder else z

    def _guard(self, u, points, what):
        for p in points:
            if np.any(np.abs(u - p) <= EPS_SING * (1.0 + np.abs(u))):
                raise SingularityTooClose(f"{what} evaluated within guard of {p}")

    def log_evaluate(self, z):
        """log rho(z) as a complex number (imaginary part is not continuous)."""
        scalar = np.isscalar(z)
        z = np.asarray(z, dtype=complex)
        u = self._variable(z)
        self._guard(u, [a for a, al in self.poly_factors if al < 0]
                    + [b for b, _ in self.exp_principal], "rho")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.zeros_like(z)
            if self.is_cylinder:
                out = out + 1j * self.gamma * z
            for a, al in self.poly_factors:
                out = out + al * np.log(u - a)
            for k, c in self.exp_poly:
                out = out + c * (np.exp(1j * k * z) if self.is_cylinder else z ** k)
            for b, ds in self.exp_principal:
                q = u - b
                for r, d in enumerate(ds, start=1):
                    out = out + d / q ** r
        return complex(out) if scalar else out

    def _exponent(self, z, u):
        out = np.zeros_like(z)
        for k, c in self.exp_poly:
            out = out + c * (np.exp(1j * k * z) if self.is_cylinder else z ** k)
        for b, ds in self.exp_principal:
            q = u - b
            for r, d in enumerate(ds, start=1):
                out = out + d / q ** r
        return out

    def evaluate(self, z):
        """rho(z); raises Overflow when |rho| is not representable.

        The exponential factor is evaluated directly while |Re(Q + R_s)| stays
        below ``LOG_THRESHOLD``; beyond that everything goes through log space.
        """
        scalar = np.isscalar(z)
        za = np.asarray(z, dtype=complex)
        u = self._variable(za)
        self._guard(u, [a for a, al in self.poly_factors if al < 0]
                    + [b for b, _ in self.exp_principal], "rho")
        with np.errstate(all="ignore"):
            ex = self._exponent(za, u)
        if np.all(np.abs(ex.real) <= LOG_THRESHOLD):
            with np.errstate(all="ignore"):
                pre = np.ones_like(za)
                if self.is_cylinder and self.gamma:
                    pre = pre * np.exp(1j * self.gamma * za)
                for a, al in self.poly_factors:
                    pre = pre * (u - a) ** al
                val = pre * np.exp(ex)
            if np.all(np.isfinite(val)):
                return complex(val) if scalar else val
        lg = self.log_evaluate(z)
        re = np.real(lg)
        if np.any(re > LOG_MAX):
            raise Overflow("rho overflows", log_abs=float(np.max(re)))
        with np.errstate(invalid="ignore"):
            val = np.exp(lg)
        if np.isscalar(lg):
            return complex(val) if not math.isinf(re) else 0j
        return np.where(np.isneginf(re), 0j, val)

    __call__ = evaluate

    def drift(self, z):
        """v(z) = rho'(z)/rho(z)."""
        scalar = np.isscalar(z)
        z = np.asarray(z, dtype=complex)
        u = self._variable(z)
        self._guard(u, self.drift_singular_points_raw(), "drift")
        if self.is_cylinder:
            acc = np.full_like(z, complex(self.gamma))
            for a, al in self.poly_factors:
                acc = acc + al * u / (u - a)
            for k, c in self.exp_poly:
                acc = acc + k * c * np.exp(1j * k * z)
            for b, ds in self.exp_principal:
                q = u - b
                for r, d in enumerate(ds, start=1):
                    acc = acc - r * d * u / q ** (r + 1)
            out = 1j * acc
        else:
            out = np.zeros_like(z)
            for a, al in self.poly_factors:
                out = out + al / (z - a)
            for k, c in self.exp_poly:
                if k >= 1:
                    out = out + k * c * z ** (k - 1)
            for b, ds in self.exp_principal:
                q = z - b
                for r, d in enumerate(ds, start=1):
                    out = out - r * d / q ** (r + 1)
        return complex(out) if scalar else out

    def drift_singular_points_raw(self) -> list:
        return [a for a, _ in self.poly_factors] + [b for b, _ in self.exp_principal]

    def packed(self) -> dict:
        """Flat arrays describing the drift, for compiled kernels."""
        betas = self.betas
        bmax = max(betas) if betas else 1
        dmat = np.zeros((max(len(betas), 1), bmax), dtype=complex)
        for m, (_, ds) in enumerate(self.exp_principal):
            dmat[m, :len(ds)] = ds
        return {
            "cylinder": self.is_cylinder,
            "gamma": float(self.gamma),
            "a": np.array([a for a, _ in self.poly_factors], dtype=complex),
            "alpha": np.array([al for _, al in self.poly_factors], dtype=float),
            "k": np.array([k for k, _ in self.exp_poly], dtype=np.int64),
            "c": np.array([c for _, c in self.exp_poly], dtype=complex),
            "b": np.array([b for b, _ in self.exp_principal], dtype=complex),
            "beta": np.array(betas, dtype=np.int64),
            "d": dmat,
        }

    # -- symmetry ---------------------------------------------------------

    def reflect(self) -> "Density":
        """Density proportional to rho(-z) (constant factors dropped)."""
        if not self.is_cylinder:
            return Density.line(
                [(-a, al) for a, al in self.poly_factors],
                {k: c * (-1) ** k for k, c in self.exp_poly},
                [(-b, [d * (-1) ** r for r, d in enumerate(ds, start=1)])
                 for b, ds in self.exp_principal])
        # omega -> 1/omega
        gamma = -self.gamma - sum(al for _, al in self.poly_factors)
        factors = [(1 / a, al) for a, al in self.poly_factors]
        poly = {-k: c for k, c in self.exp_poly if k != 0}
        principal = []
        for b, ds in self.exp_principal:
            bp = 1 / b
            new = []
            for j in range(1, len(ds) + 1):
                new.append(sum(d * (-b) ** (-r) * math.comb(r, j) * bp ** j
                               for r, d in enumerate(ds, start=1) if r >= j))
            principal.append((bp, new))
        return Density.cylinder(gamma, factors, poly, principal)

    # -- census -----------------------------------------------------------

    def census(self) -> "SingularityCensus":
        return census(self)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        cp = lambda z: [complex(z).real, complex(z).imag]  # noqa: E731
        return {
            "mode": self.mode.value,
            "gamma": self.gamma,
            "poly_factors": [{"a": cp(a), "alpha": al} for a, al in self.poly_factors],
            "exp_poly": {str(k): cp(c) for k, c in self.exp_poly},
            "exp_principal": [{"b": cp(b), "d": [cp(x) for x in ds]}
                              for b, ds in self.exp_principal],
        }

    @classmethod
    def from_json(cls, obj) -> "Density":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            mode = Mode(obj.get("mode", "line"))
            factors = [(_as_complex(f["a"]), f["alpha"]) for f in obj.get("poly_factors", [])]
            poly = {int(k): _as_complex(v) for k, v in obj.get("exp_poly", {}).items()}
            principal = [(_as_complex(p["b"]), [_as_complex(x) for x in p["d"]])
                         for p in obj.get("exp_principal", [])]
            gamma = obj.get("gamma", 0)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidDensity):
                raise
            raise InvalidDensity(f"malformed density specification: {exc}") from exc
        return cls(mode, tuple(factors), poly, tuple(principal), gamma)

    def __str__(self):
        var = "w" if self.is_cylinder else "z"
        parts = []
        if self.is_cylinder and self.gamma:
            parts.append(f"w^{self.gamma}")
        for a, al in self.poly_factors:
            parts.append(f"({var}-({a:.4g}))^{al}")
        ex = [f"({c:.4g}){var}^{k}" for k, c in self.exp_poly]
        for b, ds in self.exp_principal:
            ex += [f"({d:.4g})/({var}-({b:.4g}))^{r}" for r, d in enumerate(ds, 1)]
        if ex:
            parts.append("exp(" + " + ".join(ex) + ")")
        return " * ".join(parts) or "1"


@dataclass(frozen=True)
class SingularityCensus:
    density: Density
    finite_zeroes: tuple
    poles: tuple
    essential_singularities: tuple
    generalized_zero_approaches: tuple
    n_closed: int
    n_gamma: int
    counts: dict = field(default_factory=dict)

    @property
    def has_zeroes(self) -> bool:
        return len(self.generalized_zero_approaches) > 0

    def to_json(self) -> dict:
        from .endpoints import endpoint_to_json
        cp = lambda z: [complex(z).real, complex(z).imag]  # noqa: E731
        return {
            "density": self.density.to_json(),
            "finite_zeroes": [{"z": cp(z), "order": o} for z, o in self.finite_zeroes],
            "poles": [{"z": cp(z), "order": o} for z, o in self.poles],
            "essential_singularities": [cp(b) for b in self.essential_singularities],
            "generalized_zero_approaches": [endpoint_to_json(e)
                                            for e in self.generalized_zero_approaches],
            "n_closed": self.n_closed,
            "n_gamma": self.n_gamma,
            "counts": self.counts,
        }


def infinity_directions(c: complex, n: int) -> list:
    """Angles where Re(c z**n) -> -infinity, one per decay sector."""
    return [wrap_angle((math.pi - cmath.phase(c) + TWO_PI * j) / n) for j in range(n)]


def essential_directions(d: complex, beta: int) -> list:
    """Angles of z - b along which exp(d / (z - b)**beta) -> 0."""
    return [wrap_angle((cmath.phase(d) - math.pi + TWO_PI * j) / beta)
            for j in range(beta)]


def census(d: Density) -> SingularityCensus:
    """Zeroes, singularities, zero approaches and the path count N_Gamma."""
    zeros, poles = [], []
    for a, al in d.poly_factors:
        if d.coincident_principal(a) is not None:
            continue
        loc = d.to_z(a) if d.is_cylinder else a
        (zeros if al > 0 else poles).append((loc, abs(al)))
    approaches = [FiniteZero(z) for z, _ in zeros]
    poly = d.poly_dict
    counts = {"N_p_prime": len(zeros) + len(poles), "N_s": len(d.exp_principal),
              "sum_beta": sum(d.betas)}
    if d.is_cylinder:
        npl, nmi = d.n_q_plus, d.n_q_minus
        counts.update(N_q_plus=npl, N_q_minus=nmi)
        if npl > 0:
            for j, x in enumerate(infinity_directions(poly[npl], npl)):
                approaches.append(ImaginaryInfinity(-1, x % TWO_PI))
        if nmi < 0:
            # omega -> 0 along arg(omega) = x; omega**nmi has argument nmi*x
            c = poly[nmi]
            for j in range(-nmi):
                x = (math.pi - cmath.phase(c) + TWO_PI * j) / nmi
                approaches.append(ImaginaryInfinity(+1, x % TWO_PI))
    else:
        counts["N_q"] = d.n_q
        if d.n_q > 0:
            for th in infinity_directions(poly[d.n_q], d.n_q):
                approaches.append(InfinityRay(th))
    ess = []
    for b, ds in d.exp_principal:
        beta, lead = len(ds), ds[-1]
        if d.is_cylinder:
            zb = d.to_z(b)
            # near b: omega - b ~ i b (z - zb)
            lead = lead / (1j * b) ** beta
        else:
            zb = b
        ess.append(zb)
        for j, ang in enumerate(essential_directions(lead, beta)):
            approaches.append(EssentialApproach(zb, j, ang))
    n_closed = len(poles) + len(ess) + (1 if d.is_cylinder else 0)
    n_open = len(approaches) - 1 if approaches else 0
    counts["N_z"] = len(approaches)
    if not d.is_cylinder:
        counts["N_g"] = counts["N_p_prime"] + d.n_q + sum(b + 1 for b in d.betas)
    return SingularityCensus(d, tuple(zeros), tuple(poles), tuple(ess),
                             tuple(approaches), n_closed, n_open + n_closed, counts)


def n_gamma_formula(d: Density) -> int:
    """Closed-form path count, written independently of :func:`census`."""
    npp = sum(1 for a, _ in d.poly_factors if d.coincident_principal(a) is None)
    ess = sum(b + 1 for b in d.betas)
    if not d.is_cylinder:
        n_g = npp + d.n_q + ess
        no_zeroes = d.n_q == 0 and not d.exp_principal and all(
            al < 0 for _, al in d.poly_factors)
        return n_g if no_zeroes else n_g - 1
    npl, nmi = d.n_q_plus, d.n_q_minus
    n_z = (sum(d.betas) + sum(1 for a, al in d.poly_factors
                              if al > 0 and d.coincident_principal(a) is None)
           + max(npl, 0) + max(-nmi, 0))
    return max(npl, 0) + max(-nmi, 0) + npp + ess + 1 - (1 if n_z > 0 else 0)


def evaluate(d: Density, z):
    return d.evaluate(z)


def drift(d: Density, z):
    return d.drift(z)
