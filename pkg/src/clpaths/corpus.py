"""Named reference densities.

Each entry pairs a density with its expected number of independent path
functionals.  ``stated`` is the value quoted for the density in the
literature (or ``None``), ``counted`` the value from the counting formula.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .density import Density


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    density: Density
    counted: int
    stated: int | None
    description: str


def table1() -> Density:
    """(x - i)**2 exp(-1.6 x**2)."""
    return Density.line([(1j, 2)], {2: -1.6})


def winding() -> Density:
    """exp(-iz) on the cylinder: one winding path."""
    return Density.cylinder(-1)


def cylinder_exp(sigma: int) -> Density:
    """exp(sigma * i z + exp(2iz))."""
    return Density.cylinder(sigma, exp_poly={2: 1})


def mixed() -> Density:
    """Zero of order 3, pole of order 2, quartic Q and an essential point at 0."""
    return Density.line([(0.5 + 0.3j, 3), (-0.7 + 0.2j, -2)], {4: -1},
                        [(0, [0, -1])])


def two_zero_gaussian(z1=0.5 + 0.5j, z2=-0.8 + 0.2j, beta=1.0) -> Density:
    return Density.line([(z1, 1), (z2, 1)], {2: -beta})


def essential(zs=1.0, n=1.0) -> Density:
    """exp(-z**2/2 - n/(z - zs))."""
    return Density.line([], {2: -0.5}, [(zs, [-n])])


def periodic(c=0.3) -> Density:
    """(1 + 2 cos(z - i))**2 exp(c cos z)."""
    r = math.exp(-1.0)
    roots = [r * cmath.exp(2j * math.pi / 3), r * cmath.exp(-2j * math.pi / 3)]
    return Density.cylinder(-2, [(q, 2) for q in roots], {1: c / 2, -1: c / 2})


POLES = (0.3 + 0.1j, -1 + 0.5j, 0.2 - 1.1j)


def pure_pole(n: int) -> Density:
    """prod_{l<n} 1/(z - p_l)."""
    return Density.line([(p, -1) for p in POLES[:n]])


def gaussian(beta=0.5) -> Density:
    """exp(-beta z**2); beta may be complex."""
    return Density.line([], {2: -beta})


def shifted_gaussian(a) -> Density:
    """(x - a) exp(-x**2/2)."""
    return Density.line([(a, 1)], {2: -0.5})


def fourier(m: int = 1, beta: float = 1.0) -> Density:
    """exp(i m x + beta cos x)."""
    return Density.cylinder(m, exp_poly={1: beta / 2, -1: beta / 2})


def entries() -> list[CorpusEntry]:
    """The dimension-check corpus."""
    return [
        CorpusEntry("winding", winding(), 1, 1, "exp(-iz)"),
        CorpusEntry("cyl+", cylinder_exp(1), 2, 2, "exp(iz + e^{2iz})"),
        CorpusEntry("cyl-", cylinder_exp(-1), 2, 2, "exp(-iz + e^{2iz})"),
        CorpusEntry("mixed", mixed(), 8, 8,
                    "(z-z1)^3 (z-z2)^-2 exp(-z^4 - 1/z^2)"),
        CorpusEntry("two-zero", two_zero_gaussian(), 3, None,
                    "(z-z1)(z-z2) exp(-z^2)"),
        CorpusEntry("essential", essential(), 3, None,
                    "exp(-z^2/2 - 1/(z-1))"),
        CorpusEntry("periodic", periodic(), 4, 2,
                    "(1+2cos(z-i))^2 exp(0.3 cos z)"),
        CorpusEntry("pole1", pure_pole(1), 1, None, "1/(z-p1)"),
        CorpusEntry("pole2", pure_pole(2), 2, None, "1/((z-p1)(z-p2))"),
        CorpusEntry("pole3", pure_pole(3), 3, None, "1/((z-p1)(z-p2)(z-p3))"),
        CorpusEntry("gaussian", gaussian(), 1, 1, "exp(-z^2/2)"),
    ]


def get(name: str) -> Density:
    for e in entries():
        if e.name == name:
            return e.density
    extra = {"table1": table1, "fourier": fourier,
             "complex-gaussian": lambda: gaussian(0.5 + 0.5j)}
    if name in extra:
        return extra[name]()
    raise KeyError(name)
