"""Complex Langevin simulation.

Walkers follow ``dz = v(z) dt + sqrt(2 dt) eta`` with real Gaussian noise
``eta``, which makes the visit density ``P(x, y)`` obey the Fokker-Planck
equation of the complexified process.  Expectation values under ``P`` are
accumulated online; errors come from binning the per-walker time series.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .contour import Observable
from .density import TWO_PI, Density
from .errors import Runaway, SingularHit

__all__ = [
    "CLConfig", "ExpectationRecord", "Histogram", "CLResult", "SdeImage",
    "DRIFT", "step", "run",
]

# kernel observable codes
K_MONO, K_EXP, K_A_MONO, K_A_EXP, K_DRIFT = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class SdeImage:
    """The observable ``A f = f' + v f`` for a basic observable ``f``."""

    base: Observable

    @property
    def label(self) -> str:
        return f"A[{self.base.label}]"

    @property
    def decay_verified(self) -> bool:
        return self.base.decay_verified


@dataclass(frozen=True)
class _Drift:
    label: str = "v"
    decay_verified: bool = True


DRIFT = _Drift()


def _code(obs):
    if isinstance(obs, Observable):
        return (K_MONO if obs.kind == "monomial" else K_EXP), obs.power
    if isinstance(obs, SdeImage):
        return (K_A_MONO if obs.base.kind == "monomial" else K_A_EXP), obs.base.power
    if isinstance(obs, _Drift):
        return K_DRIFT, 0
    raise TypeError(f"unsupported observable {obs!r}")


# ---------------------------------------------------------------------------
# configuration and results

@dataclass(frozen=True)
class CLConfig:
    """Run parameters.  Times are process times; ``t_measure`` is the
    measurement duration that follows the burn-in."""

    n_walkers: int = 64
    dt: float = 1e-4
    t_burn: float = 50.0
    t_measure: float = 5000.0
    seed: int = 0
    adaptive: bool = True
    dt_cap_factor: float = 0.1
    start_points: tuple = (0j,)
    meas_interval: float = 0.05
    y_cap: float = 50.0
    hist_bins: tuple = (400, 400)
    n_groups: int = 16
    n_threads: int | None = None
    bin_time: float = 1.0
    chunk: int = 1 << 16

    def __post_init__(self):
        object.__setattr__(self, "start_points", tuple(complex(z) for z in self.start_points))
        object.__setattr__(self, "hist_bins", tuple(int(b) for b in self.hist_bins))
        for name in ("n_walkers", "n_groups", "chunk"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("dt", "t_burn", "t_measure", "dt_cap_factor", "meas_interval",
                     "y_cap", "bin_time"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.meas_interval < self.dt:
            raise ValueError("meas_interval must not be shorter than dt")
        if not self.start_points:
            raise ValueError("at least one start point is needed")

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["start_points"] = [[z.real, z.imag] for z in self.start_points]
        out["hist_bins"] = list(self.hist_bins)
        return out


@dataclass
class ExpectationRecord:
    observable: object
    mean: complex
    err: complex
    n_samples: int
    tau_int: float
    decay_verified: bool = True
    plateau: bool = True

    @property
    def label(self) -> str:
        return self.observable.label

    def to_json(self) -> dict:
        return {"observable": self.label, "mean": [self.mean.real, self.mean.imag],
                "err": [self.err.real, self.err.imag], "n_samples": self.n_samples,
                "tau_int": self.tau_int, "decay_verified": self.decay_verified,
                "plateau": self.plateau}


@dataclass
class Histogram:
    """Visit counts of the measured configurations on a regular grid.

    ``counts`` has shape ``(n_groups, nx, ny)``; walker ``w`` contributes to
    group ``w % n_groups``.  Index ``[i, j]`` covers
    ``x in [x0 + i dx, x0 + (i+1) dx)`` and likewise for y.
    """

    counts: np.ndarray
    bounds: tuple
    overflow: int = 0
    cylinder: bool = False

    @property
    def shape(self):
        return self.counts.shape[1:]

    @property
    def spacing(self):
        (x0, x1), (y0, y1) = self.bounds
        nx, ny = self.shape
        return (x1 - x0) / nx, (y1 - y0) / ny

    def centers(self):
        (x0, _), (y0, _) = self.bounds
        dx, dy = self.spacing
        nx, ny = self.shape
        return x0 + dx * (np.arange(nx) + 0.5), y0 + dy * (np.arange(ny) + 0.5)

    def density(self, group: int | None = None) -> np.ndarray:
        """Normalized visit density ``P(x, y)`` (integrates to the in-grid
        fraction of samples)."""
        c = self.counts.sum(axis=0) if group is None else self.counts[group]
        total = c.sum() + (self.overflow if group is None else 0)
        dx, dy = self.spacing
        return c / (total * dx * dy) if total > 0 else c

    def header(self, extra=None) -> dict:
        (x0, x1), (y0, y1) = self.bounds
        h = {"nx": self.shape[0], "ny": self.shape[1], "n_groups": self.counts.shape[0],
             "bounds": [[x0, x1], [y0, y1]], "overflow": int(self.overflow),
             "cylinder": self.cylinder, "dtype": "float64", "order": "C"}
        if extra:
            h.update(extra)
        return h

    def save(self, path, extra=None):
        with open(path, "wb") as fh:
            fh.write((json.dumps(self.header(extra)) + "\n").encode())
            fh.write(np.ascontiguousarray(self.counts, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "Histogram":
        with open(path, "rb") as fh:
            h = json.loads(fh.readline().decode())
            data = np.frombuffer(fh.read(), dtype="<f8")
        counts = data.reshape(h["n_groups"], h["nx"], h["ny"]).copy()
        b = h["bounds"]
        return cls(counts, ((b[0][0], b[0][1]), (b[1][0], b[1][1])), h["overflow"],
                   h["cylinder"])


@dataclass
class CLResult:
    records: list
    histogram: Histogram
    config: CLConfig
    diagnostics: dict = field(default_factory=dict)
    covariance: np.ndarray | None = None
    """Joint covariance of (Re f_1..Re f_n, Im f_1..Im f_n)."""

    def record(self, label) -> ExpectationRecord:
        for r in self.records:
            if r.label == label:
                return r
        raise KeyError(label)


# ---------------------------------------------------------------------------
# compiled kernel

@njit(cache=True, nogil=True, inline="always")
def _cpow(z, n):
    out = 1.0 + 0j
    for _ in range(n):
        out *= z
    return out


@njit(cache=True, nogil=True, inline="always")
def _obs_value(code, p, z, v):
    if code == 0:
        return _cpow(z, p)
    if code == 1:
        return np.exp(1j * p * z)
    if code == 2:
        zp = _cpow(z, p)
        if p == 0:
            return v
        return p * _cpow(z, p - 1) + v * zp
    if code == 3:
        return (1j * p + v) * np.exp(1j * p * z)
    return v


@njit(cache=True, nogil=True)
def _evolve(st, noise, t_end, dt, cap, adaptive, y_cap, cyl,
            gamma, a, alpha, kk, c, b, beta, dm,
            measure, t0, meas_dt, bin_t, codes, powers, binsum, bincnt, sumsq,
            hist, hx0, hx1, hy0, hy1, pilot, t_pilot):
    """Advance one walker until t_end or until the noise buffer is used up.

    st = [x, y, t, t_next_measure, min_dt_eff, steps, overflow, noise_pos,
    rejected_steps, previous x, previous y, previous t].
    Returns 0 (reached t_end), 1 (needs noise), 2 (runaway), 3 (singular).
    """
    x, y, t, tn = st[0], st[1], st[2], st[3]
    min_h = st[4]
    steps = st[5]
    overflow = st[6]
    i = int(st[7])
    rejected = st[8]
    px, py, pt = st[9], st[10], st[11]
    rejected_run = 0
    n = noise.size
    nb = bincnt.size
    nx, ny = hist.shape[0], hist.shape[1]
    status = 0
    while t < t_end:
        if i >= n:
            status = 1
            break
        z = complex(x, y)
        # drift, written out here: helper calls taking arrays cost
        # reference-count traffic on every step
        hit = False
        if cyl:
            u = np.exp(1j * z)
            acc = complex(gamma)
            for ell in range(a.size):
                q = u - a[ell]
                if q == 0:
                    hit = True
                    q = 1.0
                acc += alpha[ell] * u / q
            for j in range(kk.size):
                acc += kk[j] * c[j] * np.exp(1j * kk[j] * z)
            for m in range(b.size):
                q = u - b[m]
                if q == 0:
                    hit = True
                    q = 1.0
                qp = q * q
                for r in range(1, beta[m] + 1):
                    acc -= r * dm[m, r - 1] * u / qp
                    qp *= q
            v = 1j * acc
        else:
            v = 0j
            for ell in range(a.size):
                q = z - a[ell]
                if q == 0:
                    hit = True
                    q = 1.0
                v += alpha[ell] / q
            for j in range(kk.size):
                if kk[j] >= 1:
                    v += kk[j] * c[j] * _cpow(z, kk[j] - 1)
            for m in range(b.size):
                q = z - b[m]
                if q == 0:
                    hit = True
                    q = 1.0
                qp = q * q
                for r in range(1, beta[m] + 1):
                    v -= r * dm[m, r - 1] / qp
                    qp *= q
        vv = v.real * v.real + v.imag * v.imag
        if hit:
            # landed exactly on a singular point (below float resolution of
            # its location): undo the step and draw the next noise value
            if (i == 0 and st[5] == 0) or rejected_run >= 1000:
                status = 3
                break
            x, y, t = px, py, pt
            steps -= 1
            rejected += 1
            rejected_run += 1
            continue
        rejected_run = 0
        if not np.isfinite(vv):
            status = 3
            break
        if measure and t >= tn:
            k = int((tn - t0) / bin_t)
            if k >= nb:
                k = nb - 1
            bincnt[k] += 1
            for j in range(codes.size):
                f = _obs_value(codes[j], powers[j], z, v)
                binsum[k, j] += f
                sumsq[j, 0] += f.real * f.real
                sumsq[j, 1] += f.imag * f.imag
            ix = int(math.floor((x - hx0) / (hx1 - hx0) * nx))
            iy = int(math.floor((y - hy0) / (hy1 - hy0) * ny))
            if 0 <= ix < nx and 0 <= iy < ny:
                hist[ix, iy] += 1.0
            else:
                overflow += 1
            tn += meas_dt
        h = dt
        if adaptive and vv * dt > cap:
            h = cap / vv
            if h < 1e-200:
                status = 3
                break
        px, py, pt = x, y, t
        x += v.real * h + math.sqrt(2.0 * h) * noise[i]
        y += v.imag * h
        i += 1
        t += h
        steps += 1
        if h < min_h:
            min_h = h
        if cyl:
            x = x % (2.0 * math.pi)
        if abs(y) > y_cap:
            status = 2
            break
        if pilot.size > 0 and t >= t_pilot:
            if x < pilot[0]:
                pilot[0] = x
            if x > pilot[1]:
                pilot[1] = x
            if y < pilot[2]:
                pilot[2] = y
            if y > pilot[3]:
                pilot[3] = y
    st[0], st[1], st[2], st[3] = x, y, t, tn
    st[4] = min_h
    st[5] = steps
    st[6] = overflow
    st[7] = i
    st[8] = rejected
    st[9], st[10], st[11] = px, py, pt
    return status


# ---------------------------------------------------------------------------
# python driver

def step(z: complex, dt_eff: float, noise: float, v) -> complex:
    """One Euler-Maruyama step ``z + v(z) dt + sqrt(2 dt) noise`` (real noise).

    ``v`` is a Density or any callable returning the drift.
    """
    drift = v.drift(z) if isinstance(v, Density) else v(z)
    return z + drift * dt_eff + math.sqrt(2.0 * dt_eff) * noise


def _kernel_walk(d: Density, z: complex, dt: float, noise, cap: float | None,
                 t_end: float) -> np.ndarray:
    pk = d.packed()
    st = np.array([z.real, z.imag, 0.0, 0.0, dt, 0.0, 0.0, 0.0, 0.0, z.real, z.imag, 0.0])
    codes = np.zeros(0, dtype=np.int64)
    status = _evolve(st, np.asarray(noise, dtype=float), t_end, dt,
                     cap if cap is not None else 1.0, cap is not None, math.inf,
                     pk["cylinder"], pk["gamma"], pk["a"], pk["alpha"], pk["k"], pk["c"],
                     pk["b"], pk["beta"], pk["d"], False, 0.0, 1.0, 1.0, codes, codes,
                     np.zeros((1, 0), dtype=complex), np.zeros(1, dtype=np.int64),
                     np.zeros((0, 2)), np.zeros((1, 1)), 0.0, 1.0, 0.0, 1.0,
                     np.zeros(0), 0.0)
    if status == 3:
        raise SingularHit(f"drift not finite at {complex(st[0], st[1])}")
    return st


def kernel_step(d: Density, z: complex, dt: float, noise: float = 0.0,
                cap: float | None = None) -> complex:
    """One step of the compiled kernel from ``z`` with the given noise value.

    With ``cap`` the adaptive rule ``h = cap / |v|**2`` applies when
    ``|v|**2 dt > cap``.  Meant for checking the kernel against ``step``.
    """
    st = _kernel_walk(d, z, dt, [float(noise)], cap, dt * 0.5)
    return complex(st[0], st[1])


class _Walker:
    def __init__(self, wid: int, cfg: CLConfig):
        self.wid = wid
        seq = np.random.SeedSequence([cfg.seed & (2 ** 64 - 1), wid])
        self.gen = np.random.Generator(np.random.Philox(seq))
        self.chunk = cfg.chunk
        self.noise = self.gen.standard_normal(self.chunk)
        z = cfg.start_points[wid % len(cfg.start_points)]
        self.st = np.array([z.real, z.imag, 0.0, 0.0, cfg.dt, 0.0, 0.0, 0.0, 0.0,
                            z.real, z.imag, 0.0])
        self.pilot = np.array([np.inf, -np.inf, np.inf, -np.inf])

    def refill(self):
        self.noise = self.gen.standard_normal(self.chunk)
        self.st[7] = 0.0


def _run_phase(walkers, pk, cfg, t_end, measure, codes, powers, acc, hist, bounds, t_pilot):
    (hx0, hx1), (hy0, hy1) = bounds
    for w in walkers:
        if measure:
            binsum, bincnt, sumsq = acc[w.wid]
        else:
            binsum = np.zeros((1, codes.size), dtype=complex)
            bincnt = np.zeros(1, dtype=np.int64)
            sumsq = np.zeros((codes.size, 2))
        pilot = w.pilot if not measure else np.zeros(0)
        while True:
            status = _evolve(w.st, w.noise, t_end, cfg.dt, cfg.dt_cap_factor, cfg.adaptive,
                             cfg.y_cap, pk["cylinder"], pk["gamma"], pk["a"], pk["alpha"],
                             pk["k"], pk["c"], pk["b"], pk["beta"], pk["d"],
                             measure, cfg.t_burn, cfg.meas_interval, cfg.bin_time,
                             codes, powers, binsum, bincnt, sumsq,
                             hist, hx0, hx1, hy0, hy1, pilot, t_pilot)
            if status == 1:
                w.refill()
                continue
            if status == 2:
                return ("runaway", w.wid, float(w.st[2]), complex(w.st[0], w.st[1]))
            if status == 3:
                return ("singular", w.wid, float(w.st[2]), complex(w.st[0], w.st[1]))
            break
    return None


def _block(s, c, level):
    """Merge 2**level consecutive bins of every walker."""
    for _ in range(level):
        m = s.shape[1] // 2
        s = s[:, :2 * m].reshape(s.shape[0], m, 2, *s.shape[2:]).sum(axis=2)
        c = c[:, :2 * m].reshape(c.shape[0], m, 2).sum(axis=2)
    return s, c


def _binned_error(sums, counts, min_blocks=32):
    """Standard error of the mean from per-walker bin sums.

    Bins are merged pairwise; the plateau is the first level after which
    the estimate grows by less than 2 %, and the value reported is the
    largest estimate over that level and the next two (at least
    ``min_blocks`` blocks are kept).  Returns (error, plateau_reached, level).
    """
    mean = sums.sum() / counts.sum()
    errs = []
    s, c = sums, counts
    while True:
        ok = c > 0
        blocks = s[ok] / c[ok]
        w = c[ok].astype(float)
        if blocks.size < min_blocks:
            break
        # weighted variance of block means, error of the weighted mean
        var = np.sum(w * (blocks - mean) ** 2) / np.sum(w)
        neff = np.sum(w) ** 2 / np.sum(w ** 2)
        errs.append(math.sqrt(var / (neff - 1)))
        if s.shape[1] < 2:
            break
        s, c = _block(s, c, 1)
    if not errs:
        return float("nan"), False, 0
    for lv in range(len(errs) - 1):
        if errs[lv + 1] <= errs[lv] * 1.02:
            return max(errs[lv:lv + 3]), True, lv
    return errs[-1], False, len(errs) - 1


def _records(obs, codes, acc, wids, cfg):
    binsum = np.stack([acc[w][0] for w in wids])       # (walkers, bins, obs)
    bincnt = np.stack([acc[w][1] for w in wids])       # (walkers, bins)
    sumsq = np.sum([acc[w][2] for w in wids], axis=0)  # (obs, 2)
    n = int(bincnt.sum())
    out, levels = [], []
    for j, o in enumerate(obs):
        s = binsum[:, :, j]
        mean = complex(s.sum() / n)
        er, pr, lr = _binned_error(s.real, bincnt)
        ei, pi, li = _binned_error(s.imag, bincnt)
        levels += [lr, li]
        var_r = max(sumsq[j, 0] / n - mean.real ** 2, 0.0)
        var_i = max(sumsq[j, 1] / n - mean.imag ** 2, 0.0)
        taus = [0.5 * n * e * e / v * cfg.meas_interval
                for e, v in ((er, var_r), (ei, var_i)) if v > 1e-300 and np.isfinite(e)]
        out.append(ExpectationRecord(o, mean, complex(er, ei), n,
                                     max(taus) if taus else 0.0,
                                     getattr(o, "decay_verified", True), pr and pi))
    return out, _joint_covariance(binsum, bincnt, max(levels, default=0))


def _joint_covariance(binsum, bincnt, level, min_blocks=64):
    """Covariance of the means of (Re f_1..Re f_n, Im f_1..Im f_n), from
    block means at the given blocking level."""
    nobs = binsum.shape[2]
    if nobs == 0:
        return np.zeros((0, 0))
    while level > 0 and (binsum.shape[1] >> level) * binsum.shape[0] < min_blocks:
        level -= 1
    s, c = _block(binsum, bincnt, level)
    ok = c > 0
    w = c[ok].astype(float)
    blocks = s[ok] / w[:, None]
    x = np.hstack([blocks.real, blocks.imag])
    mean = (w[:, None] * x).sum(axis=0) / w.sum()
    dx = x - mean
    cov = (w[:, None] * dx).T @ dx / w.sum()
    neff = w.sum() ** 2 / np.sum(w ** 2)
    return cov / max(neff - 1, 1.0)


def _bounds(d: Density, pilots, cfg):
    lo_x = min(p[0] for p in pilots)
    hi_x = max(p[1] for p in pilots)
    lo_y = min(p[2] for p in pilots)
    hi_y = max(p[3] for p in pilots)

    def expand(lo, hi):
        if not np.isfinite(lo) or not np.isfinite(hi):
            lo, hi = -1.0, 1.0
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        half = max(1.5 * half, 0.5)
        return mid - half, mid + half
    xb = (0.0, TWO_PI) if d.is_cylinder else expand(lo_x, hi_x)
    return xb, expand(lo_y, hi_y)


def _threads(cfg):
    if cfg.n_threads:
        return cfg.n_threads
    env = os.environ.get("CLPATHS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run(d: Density, obs, cfg: CLConfig, bounds=None) -> CLResult:
    """Simulate ``cfg.n_walkers`` walkers and measure ``obs``.

    Histogram bounds come from the visited range during the second half of
    the burn-in, widened by 50 % (fixed to [0, 2pi) in x on the cylinder),
    unless given explicitly.  Samples outside count as overflow.

    Raises
    ------
    Runaway
        A walker left the strip ``|y| <= y_cap``.
    SingularHit
        The adaptive step collapsed next to a singular point of the drift.
    """
    t_start = time.perf_counter()
    obs = list(obs)
    cp = [_code(o) for o in obs]
    codes = np.array([c for c, _ in cp], dtype=np.int64)
    powers = np.array([p for _, p in cp], dtype=np.int64)
    pk = d.packed()
    for key in ("a", "b"):
        pk[key] = np.ascontiguousarray(pk[key])
    walkers = [_Walker(w, cfg) for w in range(cfg.n_walkers)]
    for w in walkers:
        z = complex(w.st[0], w.st[1])
        d.drift(z)  # raises SingularityTooClose for a bad start point
    n_groups = min(cfg.n_groups, cfg.n_walkers)
    groups = [walkers[g::n_groups] for g in range(n_groups)]
    nthreads = min(_threads(cfg), n_groups)
    dummy = np.zeros((1, 1))

    def run_groups(fn):
        if nthreads == 1:
            return [fn(g) for g in range(n_groups)]
        with ThreadPoolExecutor(nthreads) as pool:
            return list(pool.map(fn, range(n_groups)))

    def check(results):
        for r in results:
            if r is None:
                continue
            kind, wid, t, z = r
            diag = {"walker": wid, "t": t, "z": [z.real, z.imag], "y_cap": cfg.y_cap}
            if kind == "runaway":
                raise Runaway(f"walker {wid} reached |y| > {cfg.y_cap} at t = {t:.4g}", diag)
            raise SingularHit(f"walker {wid} hit a singular point of the drift at z = {z}")

    # burn-in
    check(run_groups(lambda g: _run_phase(groups[g], pk, cfg, cfg.t_burn, False, codes,
                                          powers, None, dummy, ((0, 1), (0, 1)),
                                          0.5 * cfg.t_burn)))
    if bounds is None:
        bounds = _bounds(d, [w.pilot for w in walkers], cfg)
    bounds = ((float(bounds[0][0]), float(bounds[0][1])),
              (float(bounds[1][0]), float(bounds[1][1])))
    nbins = max(1, int(math.ceil(cfg.t_measure / cfg.bin_time)))
    acc = {w.wid: (np.zeros((nbins, len(obs)), dtype=complex),
                   np.zeros(nbins, dtype=np.int64), np.zeros((len(obs), 2)))
           for w in walkers}
    hist = np.zeros((n_groups,) + cfg.hist_bins)
    for w in walkers:
        w.st[3] = cfg.t_burn + cfg.meas_interval
    t_end = cfg.t_burn + cfg.t_measure
    check(run_groups(lambda g: _run_phase(groups[g], pk, cfg, t_end, True, codes, powers,
                                          acc, hist[g], bounds, 0.0)))
    records, cov = _records(obs, codes, acc, [w.wid for w in walkers], cfg)
    overflow = int(sum(w.st[6] for w in walkers))
    histogram = Histogram(hist, bounds, overflow, d.is_cylinder)
    diag = {
        "steps": int(sum(w.st[5] for w in walkers)),
        "rejected_steps": int(sum(w.st[8] for w in walkers)),
        "min_dt_eff": float(min(w.st[4] for w in walkers)),
        "final_points": [[w.st[0], w.st[1]] for w in walkers],
        "overflow_fraction": overflow / max(1, records[0].n_samples if records else 1),
        "runtime_s": time.perf_counter() - t_start,
        "threads": nthreads,
    }
    return CLResult(records, histogram, cfg, diag, cov)


def with_overrides(cfg: CLConfig, **kw) -> CLConfig:
    return replace(cfg, **kw)
