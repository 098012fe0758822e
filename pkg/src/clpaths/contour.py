"""Paths in the complex plane (or on the cylinder) and the functionals they carry.

A :class:`PathSpec` is either an open path joining two generalized zeroes of a
density or a closed loop.  ``integrate`` evaluates ``(T_gamma, f)``, the
contour integral of ``rho * f`` along the path, by adaptive Gauss-Kronrod
quadrature on every straight piece, truncating infinite tails once the
integrand has decayed.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .density import TWO_PI, Density, SingularityCensus
from .endpoints import (Endpoint, EssentialApproach, FiniteZero,
                        ImaginaryInfinity, InfinityRay, describe,
                        endpoint_from_json, endpoint_to_json)
from .errors import NoDecay, NoPaths, QuadratureFail, SingularityTooClose
from .quadrature import integrate_interval

__all__ = [
    "Observable", "Monomial", "Exponential", "QuadratureConfig", "PathSpec",
    "FunctionalTable", "spanning_paths", "integrate", "functional_table",
    "real_line", "Endpoint", "FiniteZero", "InfinityRay", "ImaginaryInfinity",
    "EssentialApproach", "sample_path", "check_path", "load_paths", "dump_paths",
]


# ---------------------------------------------------------------------------
# observables

@dataclass(frozen=True)
class Observable:
    """Test function ``z**power`` (monomial) or ``exp(i*power*z)`` (exponential)."""

    kind: str
    power: int

    def __post_init__(self):
        if self.kind not in ("monomial", "exponential"):
            raise ValueError(f"unknown observable kind {self.kind!r}")
        if self.kind == "monomial" and self.power < 0:
            raise ValueError("monomials need a nonnegative power")

    @property
    def label(self) -> str:
        if self.kind == "monomial":
            return {0: "1", 1: "x"}.get(self.power, f"x^{self.power}")
        k = self.power
        if k == 0:
            return "1"
        if abs(k) == 1:
            return "e^{ix}" if k > 0 else "e^{-ix}"
        return f"e^{{{k}ix}}"

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "monomial":
            return z ** self.power
        return np.exp(1j * self.power * z)

    def log(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "monomial":
            if self.power == 0:
                return np.zeros_like(z)
            with np.errstate(divide="ignore"):
                return self.power * np.log(z)
        return 1j * self.power * z

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "monomial":
            if self.power == 0:
                return np.zeros_like(z)
            return self.power * z ** (self.power - 1)
        return 1j * self.power * np.exp(1j * self.power * z)

    @property
    def decay_verified(self) -> bool:
        """Whether CL estimates of this observable are trusted to converge."""
        return self.kind == "monomial" or abs(self.power) <= 1

    def to_json(self):
        return {self.kind: self.power}

    @classmethod
    def from_json(cls, obj) -> "Observable":
        if isinstance(obj, str):
            return cls.parse(obj)
        if isinstance(obj, dict) and len(obj) == 1:
            (kind, p), = obj.items()
            return cls(kind, int(p))
        raise ValueError(f"cannot read observable from {obj!r}")

    @classmethod
    def parse(cls, text: str) -> "Observable":
        """Parse ``"1"``, ``"x"``, ``"x^3"``, ``"z^2"``, ``"e^{-ix}"``, ``"e^{2ix}"``."""
        t = text.replace(" ", "").replace("{", "").replace("}", "")
        if t == "1":
            return cls("monomial", 0)
        m = re.fullmatch(r"[xz](?:\^(\d+))?", t)
        if m:
            return cls("monomial", int(m.group(1) or 1))
        m = re.fullmatch(r"(?:e\^|exp\()([+-]?\d*)i[xz]\)?", t)
        if m:
            k = m.group(1)
            k = {"": 1, "+": 1, "-": -1}.get(k, None) if k in ("", "+", "-") else int(k)
            return cls("exponential", k)
        raise ValueError(f"cannot parse observable {text!r}")


def Monomial(m: int) -> Observable:
    return Observable("monomial", m)


def Exponential(k: int) -> Observable:
    return Observable("exponential", k)


@dataclass(frozen=True)
class Weight:
    """``(omega - a)**(-r)`` or ``(z - a)**(-r)``; used for F and G moments."""

    a: complex
    r: int
    cylinder: bool = False
    label: str = ""

    def _u(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(1j * z) if self.cylinder else z

    def __call__(self, z):
        return (self._u(z) - self.a) ** (-self.r)

    def log(self, z):
        return -self.r * np.log(self._u(z) - self.a)


@dataclass(frozen=True)
class PowerWeight:
    """``omega**n`` in cylinder mode, ``z**n`` in line mode (any integer n)."""

    n: int
    cylinder: bool = False

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(1j * self.n * z) if self.cylinder else z ** self.n

    def log(self, z):
        z = np.asarray(z, dtype=complex)
        if self.cylinder:
            return 1j * self.n * z
        if self.n == 0:
            return np.zeros_like(z)
        with np.errstate(divide="ignore"):
            return self.n * np.log(z)


# ---------------------------------------------------------------------------
# configuration and path data

@dataclass(frozen=True)
class QuadratureConfig:
    tol: float = 1e-10
    rtol: float = 1e-12
    tail_eps: float = 1e-16
    max_extent: float = 50.0
    eps_path: float = 1e-3
    max_intervals: int = 4000

    def to_json(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class PathSpec:
    """An oriented open path or a closed loop.

    Open paths run from ``start`` through ``waypoints`` to ``end``.  Tails to
    infinity and into essential singularities are attached automatically
    along the canonical approach direction of the endpoint.  Closed paths are
    polygons through ``waypoints``; with ``winding != 0`` (cylinder) the last
    vertex joins ``waypoints[0] + 2*pi*winding``.
    """

    kind: str
    start: Endpoint | None = None
    end: Endpoint | None = None
    waypoints: tuple = ()
    winding: int = 0
    enclosed: tuple = ()
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("open", "closed"):
            raise ValueError("kind must be 'open' or 'closed'")
        object.__setattr__(self, "waypoints", tuple(complex(w) for w in self.waypoints))
        if self.kind == "open" and (self.start is None or self.end is None):
            raise ValueError("open paths need start and end endpoints")
        if self.kind == "closed" and not self.waypoints:
            raise ValueError("closed paths need at least one waypoint")

    @classmethod
    def open(cls, start, end, waypoints=(), label=""):
        return cls("open", start, end, tuple(waypoints), label=label)

    @classmethod
    def closed(cls, waypoints, winding=0, enclosed=(), label=""):
        return cls("closed", None, None, tuple(waypoints), winding, tuple(enclosed), label)

    @classmethod
    def loop(cls, center, radius, n=16, label=""):
        pts = [center + radius * np.exp(2j * np.pi * k / n) for k in range(n)]
        return cls.closed(pts, label=label or f"loop({center:.3g})")

    def to_json(self) -> dict:
        out = {"label": self.label, "kind": self.kind,
               "waypoints": [[w.real, w.imag] for w in self.waypoints],
               "winding": self.winding}
        if self.kind == "open":
            out["start"] = endpoint_to_json(self.start)
            out["end"] = endpoint_to_json(self.end)
        if self.enclosed:
            out["enclosed"] = list(self.enclosed)
        return out

    @classmethod
    def from_json(cls, obj) -> "PathSpec":
        wps = tuple(complex(*w) for w in obj.get("waypoints", []))
        if obj["kind"] == "open":
            return cls("open", endpoint_from_json(obj["start"]),
                       endpoint_from_json(obj["end"]), wps, int(obj.get("winding", 0)),
                       tuple(obj.get("enclosed", ())), obj.get("label", ""))
        return cls("closed", None, None, wps, int(obj.get("winding", 0)),
                   tuple(obj.get("enclosed", ())), obj.get("label", ""))

    def perturbed(self, offsets) -> "PathSpec":
        """Copy with ``offsets`` added to the waypoints (endpoints untouched)."""
        offsets = list(offsets)
        if len(offsets) != len(self.waypoints):
            raise ValueError("one offset per waypoint")
        return replace(self, waypoints=tuple(w + o for w, o in zip(self.waypoints, offsets)))

    def describe(self) -> str:
        if self.kind == "open":
            return f"{self.label}: {describe(self.start)} -> {describe(self.end)}"
        return f"{self.label}: loop through {len(self.waypoints)} vertices, winding {self.winding}"


def load_paths(obj) -> list:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return [PathSpec.from_json(p) for p in obj]


def dump_paths(paths) -> list:
    return [p.to_json() for p in paths]


def real_line(label="R", through=0j) -> PathSpec:
    """The real axis, oriented from -infinity to +infinity."""
    return PathSpec.open(InfinityRay(math.pi), InfinityRay(0.0), [through], label=label)


# ---------------------------------------------------------------------------
# geometry helpers

def _special_points(d: Density):
    pts = list(d.singular_points()) + list(d.zero_points())
    return pts


def _images(d: Density, pts):
    if not d.is_cylinder:
        return list(pts)
    return [p + TWO_PI * k for p in pts for k in (-2, -1, 0, 1, 2)]


def clearance_radius(d: Density, s: complex) -> float:
    """Radius of the disk kept free around the singular point ``s``."""
    others = [p for p in _images(d, d.singular_points()) if abs(p - s) > 1e-12]
    sep = min((abs(p - s) for p in others), default=math.inf)
    return min(0.5, 0.4 * sep)


def essential_radius(d: Density, b: complex) -> float:
    return clearance_radius(d, b)


def _seg_distance(p, q, s):
    """Distance from point s to segment [p, q] and the projection parameter."""
    v = q - p
    L2 = abs(v) ** 2
    if L2 == 0:
        return abs(s - p), 0.0
    t = ((s - p) * v.conjugate()).real / L2
    t = min(1.0, max(0.0, t))
    return abs(p + t * v - s), t


def _ray_distance(p, u, s):
    t = max(0.0, ((s - p) * u.conjugate()).real)
    return abs(p + t * u - s)


def _pieces(d: Density, path: PathSpec):
    """Decompose a path into ('seg', p, q), ('ray', p, u, sign) and
    ('ess', b, u, s0, sign) pieces in traversal order."""
    if path.kind == "closed":
        pts = list(path.waypoints)
        closing = pts[0] + TWO_PI * path.winding
        verts = pts + [closing]
        return [("seg", verts[i], verts[i + 1]) for i in range(len(verts) - 1)
                if verts[i] != verts[i + 1]]
    verts = list(path.waypoints)
    head, tail = [], []
    start, end = path.start, path.end
    if isinstance(start, FiniteZero):
        verts.insert(0, start.z)
    if isinstance(end, FiniteZero):
        verts.append(end.z)
    if isinstance(start, EssentialApproach):
        s0 = essential_radius(d, start.b)
        u = np.exp(1j * start.angle)
        anchor = start.b + s0 * u
        verts.insert(0, anchor)
        head.append(("ess", start.b, u, s0, -1))
    if isinstance(end, EssentialApproach):
        s0 = essential_radius(d, end.b)
        u = np.exp(1j * end.angle)
        anchor = end.b + s0 * u
        verts.append(anchor)
        tail.append(("ess", end.b, u, s0, +1))
    if not verts:
        verts = [0j]
    if isinstance(start, ImaginaryInfinity):
        v = verts[0]
        x = start.x + TWO_PI * round((v.real - start.x) / TWO_PI)
        anchor = complex(x, v.imag)
        if abs(anchor - v) > 0:
            verts.insert(0, anchor)
        head.append(("ray", anchor, complex(0, start.sign), -1))
    if isinstance(end, ImaginaryInfinity):
        v = verts[-1]
        x = end.x + TWO_PI * round((v.real - end.x) / TWO_PI)
        anchor = complex(x, v.imag)
        if abs(anchor - v) > 0:
            verts.append(anchor)
        tail.append(("ray", anchor, complex(0, end.sign), +1))
    if isinstance(start, InfinityRay):
        head.append(("ray", verts[0], np.exp(1j * start.angle), -1))
    if isinstance(end, InfinityRay):
        tail.append(("ray", verts[-1], np.exp(1j * end.angle), +1))
    segs = [("seg", verts[i], verts[i + 1]) for i in range(len(verts) - 1)
            if verts[i] != verts[i + 1]]
    return head + segs + tail


def sample_path(d: Density, path: PathSpec, n: int = 64, extent: float = 4.0) -> np.ndarray:
    """Points along ``path`` for drawing; infinite tails are cut at ``extent``
    and tails into essential singularities stop at 1 % of their radius."""
    out = []
    t = np.linspace(0.0, 1.0, n)
    for pc in _pieces(d, path):
        if pc[0] == "seg":
            seg = pc[1] + t * (pc[2] - pc[1])
        elif pc[0] == "ray":
            seg = pc[1] + extent * t * pc[2]
            seg = seg[::-1] if pc[3] < 0 else seg
        else:
            s = pc[3] * (0.01 + 0.99 * t)
            seg = pc[1] + s * pc[2]
            seg = seg if pc[4] < 0 else seg[::-1]
        out.append(seg)
    return np.concatenate(out) if out else np.zeros(0, complex)


def check_path(d: Density, path: PathSpec, eps_path: float = 1e-3):
    """Raise SingularityTooClose if a finite piece passes within eps_path of a
    pole or essential singularity (a tail may end at its own singularity)."""
    sing = _images(d, d.singular_points())
    for piece in _pieces(d, path):
        for s in sing:
            if piece[0] == "seg":
                dist = _seg_distance(piece[1], piece[2], s)[0]
            elif piece[0] == "ray":
                dist = _ray_distance(piece[1], piece[2], s)
            else:
                if abs(s - piece[1]) < 1e-12:
                    continue
                dist = _seg_distance(piece[1], piece[1] + piece[3] * piece[2], s)[0]
            if dist < eps_path:
                raise SingularityTooClose(
                    f"path {path.label!r} passes within {dist:.3g} of singular point {s}")


# ---------------------------------------------------------------------------
# integration

def _log_integrand(d: Density, f):
    """Callable returning log(rho * f) on arrays of z."""
    logf = getattr(f, "log", None)

    def g(z):
        lr = d.log_evaluate(z)
        if logf is not None:
            return lr + logf(z)
        with np.errstate(divide="ignore"):
            return lr + np.log(np.asarray(f(z), dtype=complex))
    return g


def _exp(lg):
    with np.errstate(over="ignore", invalid="ignore"):
        v = np.exp(lg)
    return np.where(np.isneginf(lg.real), 0j, v)


def _tail_extent(absvals, grid, thresh):
    """Index into grid beyond which the integrand stays below thresh."""
    above = ~(absvals < thresh)
    if not np.any(above):
        return 0
    last = int(np.nonzero(above)[0][-1])
    if last >= len(grid) - 2:
        return None
    return last + 1


def _integrate_piece(d, lg, piece, cfg, scale_hint):
    kind = piece[0]
    opts = dict(tol=cfg.tol, rtol=cfg.rtol, max_intervals=cfg.max_intervals,
                full_output=True)
    if kind == "seg":
        p, q = piece[1], piece[2]
        dz = q - p
        return integrate_interval(lambda s: _exp(lg(p + dz * s)) * dz, 0.0, 1.0,
                                  initial=8, **opts)
    if kind == "ray":
        p, u, sign = piece[1], piece[2], piece[3]
        grid = np.linspace(0.0, cfg.max_extent, int(cfg.max_extent * 8) + 1)
        with np.errstate(all="ignore"):
            vals = np.abs(_exp(lg(p + grid * u)))
        vals = np.where(np.isfinite(vals), vals, np.inf)
        peak = np.max(np.where(np.isfinite(vals), vals, 0.0))
        thresh = cfg.tail_eps * max(1.0, peak, scale_hint)
        idx = _tail_extent(vals, grid, thresh)
        if idx is None:
            raise NoDecay(f"integrand does not decay along the ray from {p} "
                          f"towards arg {np.angle(u):.4g} within {cfg.max_extent}")
        T = grid[min(idx + 1, len(grid) - 1)]
        if T == 0:
            return 0j, 0.0, 0.0
        val, err, l1 = integrate_interval(lambda t: _exp(lg(p + t * u)) * u, 0.0, T,
                                          initial=max(8, int(T * 4)), **opts)
        return sign * val, err, l1
    # essential tail: z = b + s*u, s in (0, s0]; sign +1 means travelling towards b
    b, u, s0, sign = piece[1], piece[2], piece[3], piece[4]
    kmax = int(4 * math.log2(s0 / 1e-9))
    svals = s0 * 2.0 ** (-np.arange(0, kmax + 1) / 4.0)
    with np.errstate(all="ignore"):
        vals = np.abs(_exp(lg(b + svals * u)))
    vals = np.where(np.isfinite(vals), vals, np.inf)
    peak = np.max(np.where(np.isfinite(vals), vals, 0.0))
    thresh = cfg.tail_eps * max(1.0, peak, scale_hint)
    idx = _tail_extent(vals, svals, thresh)
    if idx is None:
        raise NoDecay(f"integrand does not vanish approaching {b} along arg {np.angle(u):.4g}")
    smin = svals[min(idx + 1, len(svals) - 1)]
    # substitute s = exp(x) so the steep approach is resolved evenly
    lo, hi = math.log(smin), math.log(s0)

    def h(x):
        s = np.exp(x)
        return _exp(lg(b + s * u)) * u * s
    val, err, l1 = integrate_interval(h, lo, hi, initial=16, **opts)
    # traversal towards b runs from s0 down to smin
    return (-val if sign > 0 else val), err, l1


def integrate(d: Density, path: PathSpec, f, cfg: QuadratureConfig | None = None,
              return_error: bool = False, return_abs: bool = False):
    """Contour integral of ``rho * f`` along ``path``.

    ``f`` is an :class:`Observable` or any callable of z (optionally with a
    ``log`` method, which is preferred for large arguments).

    Returns the value, followed by the summed error estimate if
    ``return_error`` and by the integral of ``|rho f| |dz|`` if
    ``return_abs``.
    """
    cfg = cfg or QuadratureConfig()
    check_path(d, path, cfg.eps_path)
    lg = _log_integrand(d, f)
    pieces = _pieces(d, path)
    total, err, l1 = 0j, 0.0, 0.0
    for piece in pieces:
        v, e, a = _integrate_piece(d, lg, piece, cfg, 0.0)
        total += v
        err += e
        l1 += a
    if not np.isfinite(total):
        raise QuadratureFail(f"non-finite result on path {path.label!r}")
    out = (total,) + ((err,) if return_error else ()) + ((l1,) if return_abs else ())
    return out if len(out) > 1 else total


# ---------------------------------------------------------------------------
# spanning set

def _attachment(d: Density, e: Endpoint, far_y):
    """Finite point where the path to endpoint e begins its final approach,
    or None for infinity rays (handled by the caller)."""
    if isinstance(e, FiniteZero):
        return e.z
    if isinstance(e, EssentialApproach):
        return e.b + essential_radius(d, e.b) * np.exp(1j * e.angle)
    if isinstance(e, ImaginaryInfinity):
        return complex(e.x, far_y[e.sign])
    return None


def _route(d, p, q, depth=0):
    """Polyline waypoints (excluding p and q) from p to q around singular points."""
    if depth > 12:
        return []
    worst = None
    for s in _images(d, d.singular_points()):
        r = clearance_radius(d, s)
        dist, t = _seg_distance(p, q, s)
        if 0.0 < t < 1.0 and dist < r and (worst is None or dist < worst[0]):
            worst = (dist, s, r)
    if worst is None:
        return []
    dist, s, r = worst
    v = q - p
    nrm = 1j * v / abs(v)
    side = ((s - p) * nrm.conjugate()).real
    w = s - (1.5 * r) * nrm if side >= 0 else s + (1.5 * r) * nrm
    return _route(d, p, w, depth + 1) + [w] + _route(d, w, q, depth + 1)


def _ray_clear(d, p, angle):
    u = np.exp(1j * angle)
    for s in _images(d, d.singular_points()):
        if _ray_distance(p, u, s) < clearance_radius(d, s):
            return False
    return True


def _connect(d: Density, a: Endpoint, b: Endpoint, far_y, big_r, label):
    pa = _attachment(d, a, far_y)
    pb = _attachment(d, b, far_y)
    pre, post = [], []
    if pa is None:
        if pb is not None and _ray_clear(d, pb, a.angle):
            pa = pb
        else:
            pa = big_r * np.exp(1j * a.angle)
            pre = [pa]
    if pb is None:
        if _ray_clear(d, pa, b.angle):
            pb = pa
        else:
            pb = big_r * np.exp(1j * b.angle)
            post = [pb]
    if isinstance(a, ImaginaryInfinity):
        pre = [pa]
    if isinstance(b, ImaginaryInfinity):
        post = [pb]
    mid = _route(d, pa, pb) if pa != pb else []
    wps = pre + mid + post
    if not wps and pa == pb and not isinstance(a, FiniteZero) and not isinstance(b, FiniteZero):
        wps = [pa]
    return PathSpec.open(a, b, wps, label=label)


def spanning_paths(c: SingularityCensus) -> list:
    """``c.n_gamma`` paths whose functionals span the SDE solution space.

    Open paths form a star from the first generalized-zero approach to every
    other one; one loop surrounds each pole and essential singularity; in
    cylinder mode a horizontal line winds once around the cylinder.
    """
    d = c.density
    if c.n_gamma == 0:
        raise NoPaths("the density admits no path functionals")
    special = _special_points(d)
    ys = [p.imag for p in special] or [0.0]
    far_y = {-1: min(ys) - 1.0, +1: max(ys) + 1.0}
    big_r = 1.0 + max((abs(p) for p in special), default=0.0)
    paths = []
    app = list(c.generalized_zero_approaches)
    if app:
        root = app[0]
        for i, e in enumerate(app[1:], start=1):
            paths.append(_connect(d, root, e, far_y, big_r,
                                  f"open{i}:{describe(root)}->{describe(e)}"))
    for z, _ in c.poles:
        paths.append(PathSpec.loop(z, clearance_radius(d, z), label=f"loop-pole({z:.4g})"))
    for b in c.essential_singularities:
        paths.append(PathSpec.loop(b, clearance_radius(d, b), label=f"loop-ess({b:.4g})"))
    if d.is_cylinder:
        sing = _images(d, d.singular_points())
        cands = [0.0] + sorted({round(p.imag + s, 6) for p in sing for s in (-1.0, 1.0)})
        cands += [0.5 * (a.imag + b.imag) for a in sing for b in sing if a.imag < b.imag]

        def clear(y):
            return min((abs(y - p.imag) for p in sing), default=math.inf)
        y0 = 0.0 if clear(0.0) >= 0.5 else max(cands, key=clear)
        paths.append(PathSpec.closed([complex(0.0, y0)], winding=1,
                                     label=f"winding(y={y0:.3g})"))
    if len(paths) != c.n_gamma:
        raise AssertionError("spanning set size disagrees with the census")
    return paths


# ---------------------------------------------------------------------------
# tables

@dataclass
class FunctionalTable:
    path_labels: list
    observables: list
    values: np.ndarray
    errors: np.ndarray
    failed: np.ndarray
    norms: np.ndarray | None = None
    messages: dict = field(default_factory=dict)

    def row(self, label):
        return self.values[self.path_labels.index(label)]

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf)
        w.writerow(["label", "observable", "re", "im", "abs_err"])
        for i, lab in enumerate(self.path_labels):
            for j, ob in enumerate(self.observables):
                v = self.values[i, j]
                w.writerow([lab, ob.label, repr(float(v.real)), repr(float(v.imag)),
                            repr(float(self.errors[i, j]))])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "paths": list(self.path_labels),
            "observables": [o.label for o in self.observables],
            "values": [[[v.real, v.imag] for v in row] for row in self.values],
            "abs_err": self.errors.tolist(),
            "failed": self.failed.tolist(),
            "norms": None if self.norms is None else [[n.real, n.imag] for n in self.norms],
            "messages": {f"{k[0]},{k[1]}": m for k, m in self.messages.items()},
        }


def functional_table(d: Density, paths, obs, cfg: QuadratureConfig | None = None,
                     normalize: bool = False) -> FunctionalTable:
    """Matrix of ``(T_path, f)``; rows optionally divided by ``(T_path, 1)``.

    Cells whose quadrature fails hold NaN and are flagged in ``failed``.
    """
    cfg = cfg or QuadratureConfig()
    n, m = len(paths), len(obs)
    vals = np.full((n, m), np.nan + 0j)
    errs = np.full((n, m), np.nan)
    failed = np.zeros((n, m), dtype=bool)
    msgs = {}
    norms = np.ones(n, dtype=complex) if normalize else None
    unit = Exponential(0) if d.is_cylinder else Monomial(0)
    for i, p in enumerate(paths):
        if normalize:
            try:
                norms[i] = integrate(d, p, unit, cfg)
            except (NoDecay, QuadratureFail, SingularityTooClose) as exc:
                norms[i] = np.nan
                msgs[(i, -1)] = str(exc)
        for j, f in enumerate(obs):
            try:
                v, e = integrate(d, p, f, cfg, return_error=True)
            except (NoDecay, QuadratureFail, SingularityTooClose) as exc:
                failed[i, j] = True
                msgs[(i, j)] = f"{type(exc).__name__}: {exc}"
                continue
            if normalize:
                v, e = v / norms[i], e / abs(norms[i])
            vals[i, j], errs[i, j] = v, e
    return FunctionalTable([p.label for p in paths], list(obs), vals, errs, failed,
                           norms, msgs)
