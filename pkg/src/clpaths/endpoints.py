"""Endpoint variants for open paths (generalized zeroes of a density)."""

from __future__ import annotations

import cmath
from dataclasses import dataclass


@dataclass(frozen=True)
class FiniteZero:
    z: complex


@dataclass(frozen=True)
class InfinityRay:
    """Approach to complex infinity along ``arg z = angle`` (line mode)."""

    angle: float


@dataclass(frozen=True)
class ImaginaryInfinity:
    """Approach to ``sign * i*infinity`` on the cylinder along ``Re z = x``."""

    sign: int
    x: float = 0.0


@dataclass(frozen=True)
class EssentialApproach:
    """Approach to the essential singularity ``b`` along ``arg(z - b) = angle``.

    ``b`` and ``angle`` are given in the z-plane (in cylinder mode ``b`` is the
    z-location of the omega-plane singularity).
    """

    b: complex
    sector: int
    angle: float


Endpoint = FiniteZero | InfinityRay | ImaginaryInfinity | EssentialApproach


def _cpair(z):
    z = complex(z)
    return [z.real, z.imag]


def endpoint_to_json(e: Endpoint) -> dict:
    if isinstance(e, FiniteZero):
        return {"type": "finite_zero", "z": _cpair(e.z)}
    if isinstance(e, InfinityRay):
        return {"type": "infinity_ray", "angle": e.angle}
    if isinstance(e, ImaginaryInfinity):
        return {"type": "imaginary_infinity", "sign": e.sign, "x": e.x}
    if isinstance(e, EssentialApproach):
        return {"type": "essential", "b": _cpair(e.b), "sector": e.sector,
                "angle": e.angle}
    raise TypeError(f"not an endpoint: {e!r}")


def endpoint_from_json(obj: dict) -> Endpoint:
    kind = obj["type"]
    if kind == "finite_zero":
        return FiniteZero(complex(*obj["z"]))
    if kind == "infinity_ray":
        return InfinityRay(float(obj["angle"]))
    if kind == "imaginary_infinity":
        return ImaginaryInfinity(int(obj["sign"]), float(obj.get("x", 0.0)))
    if kind == "essential":
        return EssentialApproach(complex(*obj["b"]), int(obj["sector"]),
                                 float(obj["angle"]))
    raise ValueError(f"unknown endpoint type {kind!r}")


def describe(e: Endpoint) -> str:
    if isinstance(e, FiniteZero):
        return f"zero({e.z.real:.4g}{e.z.imag:+.4g}i)"
    if isinstance(e, InfinityRay):
        return f"inf(arg={e.angle:.4g})"
    if isinstance(e, ImaginaryInfinity):
        return f"{'+' if e.sign > 0 else '-'}i*inf(x={e.x:.4g})"
    return (f"ess({e.b.real:.4g}{e.b.imag:+.4g}i,"
            f" arg={e.angle:.4g})")


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    a = cmath.phase(cmath.exp(1j * a))
    return a
