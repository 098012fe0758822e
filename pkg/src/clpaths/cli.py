"""Config-driven experiment runner.

Every subcommand reads one JSON experiment file, fills in defaults, and writes
its results (JSON and/or CSV) to the output directory.  Each output carries
the package version and the resolved configuration, which parses back to the
same experiment.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, corpus
from .analysis import (b_representation, fit, flux, free, random_curves, sum_to_one,
                       table1_text)
from .contour import (Observable, PathSpec, QuadratureConfig, dump_paths, functional_table,
                      real_line, sample_path, spanning_paths)
from .density import Density, census
from .errors import (ClPathsError, ConfigError, CurveTooClose, InvalidDensity,
                     NoDecay, SingularityTooClose)
from .langevin import DRIFT, CLConfig, Histogram, SdeImage, run, step
from .sde_solver import (build_system, default_n_max, dimension_check, moments_of_functional,
                         path_moment_rank, residuals)

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

DEFAULTS = {
    "name": "experiment",
    "observables": ["x", "x^2"],
    "paths": "auto",
    "quadrature": QuadratureConfig().to_json(),
    "cl": CLConfig().to_json(),
    "sde": {"n_max": None, "exact": False},
    "fit": {"parametrization": "sum_to_one", "normalize": True, "n_boot": 200, "seed": 0,
            "correlated": True},
    "flux": {"n_curves": 10, "seed": 0, "lines": []},
    "output": {"dir": "clpaths-out", "formats": ["json", "csv"]},
}


def schema() -> dict:
    text = resources.files("clpaths").joinpath("config.schema.json").read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# config parsing

def _line_of(text: str, path) -> int:
    """Line number of the value at ``path`` (keys and indices) in ``text``."""
    dec = json.JSONDecoder()

    def ws(i):
        while i < len(text) and text[i] in " \t\r\n":
            i += 1
        return i

    pos = ws(0)
    for key in path:
        if pos >= len(text):
            break
        if text[pos] == "{" and isinstance(key, str):
            pos = ws(pos + 1)
            found = False
            while pos < len(text) and text[pos] != "}":
                k, pos = json.decoder.scanstring(text, pos + 1)
                pos = ws(ws(pos) + 1)
                if k == key:
                    found = True
                    break
                _, pos = dec.raw_decode(text, pos)
                pos = ws(pos)
                if text[pos] == ",":
                    pos = ws(pos + 1)
            if not found:
                break
        elif text[pos] == "[" and isinstance(key, int):
            pos = ws(pos + 1)
            for _ in range(key):
                _, pos = dec.raw_decode(text, pos)
                pos = ws(pos)
                if text[pos] == ",":
                    pos = ws(pos + 1)
        else:
            break
    return text.count("\n", 0, pos) + 1


def _complex(v) -> complex:
    return complex(v) if isinstance(v, (int, float)) else complex(v[0], v[1])


def resolve(raw: dict) -> dict:
    """Defaults filled in; ``resolve(resolve(c)) == resolve(c)``."""
    out = json.loads(json.dumps(DEFAULTS))
    for key, val in raw.items():
        if isinstance(out.get(key), dict) and isinstance(val, dict):
            out[key].update(val)
        else:
            out[key] = val
    cl = out["cl"]
    cl["start_points"] = [[_complex(z).real, _complex(z).imag] for z in cl["start_points"]]
    return out


def _validate(cfg: dict, text: str | None, where: str):
    validator = jsonschema.Draft202012Validator(schema())
    errs = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errs:
        e = errs[0]
        path = list(e.absolute_path)
        loc = f"{where}:{_line_of(text, path)}" if text is not None else where
        dotted = "/".join(str(p) for p in path) or "<root>"
        raise ConfigError(f"{loc}: {dotted}: {e.message}")


def load_config(path) -> dict:
    """Read, validate and resolve an experiment file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1: top level must be an object")
    _validate(raw, text, str(path))
    cfg = resolve(raw)
    _validate(cfg, None, str(path))
    return cfg


class Experiment:
    """Objects built from a resolved config."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.out_override = None
        dspec = cfg["density"]
        try:
            if "corpus" in dspec:
                self.density = corpus.get(dspec["corpus"])
            else:
                self.density = Density.from_json(dspec)
        except KeyError as exc:
            raise ConfigError(f"density: unknown corpus entry {exc}") from exc
        except InvalidDensity as exc:
            raise ConfigError(f"density: {exc}") from exc
        self.observables = [self._observable(t) for t in cfg["observables"]]
        self.quadrature = QuadratureConfig(**cfg["quadrature"])
        cl = dict(cfg["cl"])
        cl["start_points"] = tuple(_complex(z) for z in cl["start_points"])
        try:
            self.cl = CLConfig(**cl)
        except ValueError as exc:
            raise ConfigError(f"cl: {exc}") from exc

    @staticmethod
    def _observable(text):
        if text == "v":
            return DRIFT
        if text.startswith("A[") and text.endswith("]"):
            return SdeImage(Experiment._observable(text[2:-1]))
        try:
            return Observable.parse(text)
        except ValueError as exc:
            raise ConfigError(f"observables: {exc}") from exc

    @property
    def plain_observables(self):
        return [o for o in self.observables if isinstance(o, Observable)]

    def paths(self):
        spec = self.cfg["paths"]
        if spec == "auto":
            return spanning_paths(census(self.density))
        try:
            return [PathSpec.from_json(p) for p in spec]
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"paths: {exc}") from exc

    def output_dir(self) -> Path:
        """``--out``, then ``$CLPATHS_OUTPUT_DIR``, then ``output.dir``."""
        d = Path(self.out_override or os.environ.get("CLPATHS_OUTPUT_DIR")
                 or self.cfg["output"]["dir"])
        d.mkdir(parents=True, exist_ok=True)
        return d


# ---------------------------------------------------------------------------
# output

def _cpair(z):
    return [float(np.real(z)), float(np.imag(z))]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return _cpair(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(float(obj))
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Writer:
    def __init__(self, exp: Experiment, command: str):
        self.dir = exp.output_dir()
        self.cfg = exp.cfg
        self.command = command
        self.formats = exp.cfg["output"]["formats"]
        self.prefix = exp.cfg["name"]
        self.written = []

    def header(self) -> dict:
        return {"clpaths_version": __version__, "command": self.command, "config": self.cfg}

    def _path(self, suffix):
        p = self.dir / f"{self.prefix}.{self.command}.{suffix}"
        self.written.append(p)
        return p

    def json(self, payload: dict, suffix="json", force=False):
        if "json" in self.formats or force:
            doc = dict(self.header())
            doc["result"] = _jsonable(payload)
            self._path(suffix).write_text(json.dumps(doc, indent=1) + "\n")

    def csv(self, header, rows, suffix="csv"):
        if "csv" not in self.formats:
            return
        buf = io.StringIO()
        buf.write(f"# clpaths {__version__} {self.command}\n")
        buf.write("# config: " + json.dumps(self.cfg, separators=(",", ":")) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        self._path(suffix).write_text(buf.getvalue())

    def text(self, body, suffix="txt"):
        head = f"# clpaths {__version__} {self.command}\n# config: " + \
            json.dumps(self.cfg, separators=(",", ":")) + "\n"
        self._path(suffix).write_text(head + body + "\n")


def read_output(path) -> dict:
    """Load a JSON output file (header plus ``result``)."""
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: cannot read run output ({exc})") from exc


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(exp: Experiment, args) -> dict:
    c = census(exp.density)
    w = Writer(exp, "analyze")
    res = c.to_json()
    w.json(res)
    print(f"{exp.density}\nN_Gamma = {c.n_gamma}")
    return res


def cmd_sde(exp: Experiment, args) -> dict:
    d = exp.density
    sde = exp.cfg["sde"]
    chk = dimension_check(d, sde["n_max"], exact=sde["exact"])
    n_top = max(chk["corank_by_n_max"])
    system = build_system(d, n_top)
    paths = exp.paths()
    per_path, mvs = [], []
    for p in paths:
        mv = moments_of_functional(d, p, variables=system.variables, cfg=exp.quadrature)
        r = residuals(system, mv)
        mvs.append(mv)
        per_path.append({"path": p.label, "max_residual": float(r.max(initial=0.0))})
    rank = path_moment_rank(d, mvs, system.variables)
    res = dict(chk, path_moment_rank=rank, paths=per_path, default_n_max=default_n_max(d))
    w = Writer(exp, "sde")
    w.json(res)
    w.csv(["n_max", "corank"], sorted(chk["corank_by_n_max"].items()))
    print(f"N_Gamma = {chk['n_gamma']}  N_SDE = {chk['n_sde']}  "
          f"corank by n_max = {chk['corank_by_n_max']}  path rank = {rank}  "
          f"{'PASS' if chk['pass'] else 'FAIL'}")
    return res


def _tables(exp: Experiment):
    paths = exp.paths()
    obs = exp.plain_observables
    tab = functional_table(exp.density, paths, obs, exp.quadrature, normalize=True)
    raw = functional_table(exp.density, paths, obs, exp.quadrature, normalize=False)
    return paths, obs, tab, raw


def cmd_integrate(exp: Experiment, args) -> dict:
    paths, obs, tab, raw = _tables(exp)
    res = {"paths": dump_paths(paths), "normalized": tab.to_json(), "raw": raw.to_json()}
    w = Writer(exp, "integrate")
    w.json(res)
    rows = []
    for i, p in enumerate(paths):
        for j, o in enumerate(obs):
            rows.append([p.label, o.label, raw.values[i, j].real, raw.values[i, j].imag,
                         raw.errors[i, j], tab.values[i, j].real, tab.values[i, j].imag,
                         bool(raw.failed[i, j])])
    w.csv(["path", "observable", "re", "im", "abs_err", "re_normalized", "im_normalized",
           "failed"], rows)
    for p, n in zip(paths, raw.values[:, [o.label for o in obs].index("1")]
                    if "1" in [o.label for o in obs] else [None] * len(paths)):
        if n is not None:
            print(f"{p.label}: (T,1) = {n.real:+.6f} {n.imag:+.6f}i")
    if raw.failed.any():
        raise NoDecay("some path/observable pairs failed; see the messages in the output")
    return res


def _simulate(exp: Experiment):
    return run(exp.density, exp.observables, exp.cl)


def _write_run(exp, w: Writer, result):
    recs = [r.to_json() for r in result.records]
    res = {"records": recs, "diagnostics": result.diagnostics,
           "covariance": None if result.covariance is None else result.covariance}
    w.json(res)
    w.csv(["observable", "re", "im", "err_re", "err_im", "n_samples", "tau_int",
           "decay_verified", "plateau"],
          [[r.label, r.mean.real, r.mean.imag, r.err.real, r.err.imag, r.n_samples,
            r.tau_int, r.decay_verified, r.plateau] for r in result.records])
    hp = w._path("hist.bin")
    result.histogram.save(hp, extra=w.header())
    return res


def cmd_simulate(exp: Experiment, args) -> dict:
    t0 = time.perf_counter()
    result = _simulate(exp)
    w = Writer(exp, "simulate")
    res = _write_run(exp, w, result)
    for r in result.records:
        print(f"<{r.label}> = {r.mean.real:+.5f} ({r.err.real:.1e}) "
              f"{r.mean.imag:+.5f}i ({r.err.imag:.1e})")
    print(f"[{time.perf_counter() - t0:.1f} s, histogram {w.written[-1]}]")
    return res


class _Rec:
    """Minimal stand-in for ExpectationRecord read back from a run file."""

    def __init__(self, obj):
        self.label = obj["observable"]
        self.mean = _complex(obj["mean"])
        self.err = _complex(obj["err"])


def _records_from(path, labels):
    doc = read_output(path)
    recs = {r["observable"]: _Rec(r) for r in doc["result"]["records"]}
    order = [r["observable"] for r in doc["result"]["records"]]
    missing = [lab for lab in labels if lab not in recs]
    if missing:
        raise ConfigError(f"{path}: run has no records for {missing}")
    cov = doc["result"].get("covariance")
    if cov is not None:
        cov = np.array(cov, dtype=float)
        n = len(order)
        idx = [order.index(lab) for lab in labels]
        sel = idx + [n + i for i in idx]
        cov = cov[np.ix_(sel, sel)]
    return [recs[lab] for lab in labels], cov


def _select_cov(result, labels):
    order = [r.label for r in result.records]
    n = len(order)
    idx = [order.index(lab) for lab in labels]
    sel = idx + [n + i for i in idx]
    return result.covariance[np.ix_(sel, sel)]


def _fit(exp: Experiment, recs, cov, tab, rho=None):
    fc = exp.cfg["fit"]
    n = tab.values.shape[0]
    basis = tab.values
    if fc["parametrization"] == "b":
        if n != 2:
            raise ConfigError("fit: the b parametrization needs exactly two paths")
        basis = np.vstack([tab.values, rho])
        par = b_representation()
    elif fc["parametrization"] == "free":
        par = free(n)
    else:
        par = sum_to_one(n)
    return fit(recs, basis, labels=list(tab.path_labels) + (["R"] if basis.shape[0] > n else []),
               normalize=False, parametrization=par, n_boot=fc["n_boot"], seed=fc["seed"],
               covariance=cov if fc["correlated"] else None)


def _rho_row(exp, obs):
    t = functional_table(exp.density, [real_line()], obs, exp.quadrature, normalize=True)
    return t.values[0]


def cmd_fit(exp: Experiment, args) -> dict:
    obs = [o for o in exp.plain_observables if o.label != "1"]
    labels = [o.label for o in obs]
    if args.records:
        recs, cov = _records_from(args.records, labels)
    else:
        result = _simulate(exp)
        recs = [result.record(lab) for lab in labels]
        cov = _select_cov(result, labels)
    paths = exp.paths()
    tab = functional_table(exp.density, paths, obs, exp.quadrature, normalize=True)
    rho = _rho_row(exp, obs) if exp.cfg["fit"]["parametrization"] == "b" else None
    fr = _fit(exp, recs, cov, tab, rho)
    res = fr.to_json()
    w = Writer(exp, "fit")
    w.json(res)
    w.csv(["coefficient", "re", "im", "err_re", "err_im"],
          [[lab, a.real, a.imag, e.real, e.imag]
           for lab, a, e in zip(fr.labels, fr.coefficients, fr.errors)])
    for lab, a, e in zip(fr.labels, fr.coefficients, fr.errors):
        print(f"a[{lab}] = {a.real:+.5f} ({e.real:.1e}) {a.imag:+.5f}i ({e.imag:.1e})")
    print(f"chi2/dof = {fr.chi2:.2f}/{fr.dof}")
    return res


def cmd_flux(exp: Experiment, args) -> dict:
    if args.histogram:
        hist = Histogram.load(args.histogram)
    else:
        hist = _simulate(exp).histogram
    fc = exp.cfg["flux"]
    d = exp.density
    out = []
    for k, c in enumerate(random_curves(hist, d, fc["n_curves"], seed=fc["seed"])):
        v, e = flux(hist, d, curve=c)
        out.append({"curve": k, "kind": "closed", "vertices": [_cpair(z) for z in c],
                    "flux": v, "err": e, "pass": bool(abs(v) <= 3 * e)})
    for y0 in fc["lines"]:
        try:
            v, e = flux(hist, d, y0=y0)
        except CurveTooClose as exc:
            raise ConfigError(f"flux.lines: {exc}") from exc
        out.append({"curve": f"y={y0}", "kind": "line", "flux": v, "err": e,
                    "pass": bool(abs(v) <= 3 * e)})
    res = {"curves": out, "pass": all(c["pass"] for c in out)}
    w = Writer(exp, "flux")
    w.json(res)
    w.csv(["curve", "kind", "flux", "err", "pass"],
          [[c["curve"], c["kind"], c["flux"], c["err"], c["pass"]] for c in out])
    for c in out:
        print(f"{c['curve']}: {c['flux']:+.3e} +- {c['err']:.1e} "
              f"{'ok' if c['pass'] else 'NONZERO'}")
    return res


def cmd_table1(exp: Experiment, args) -> dict:
    t0 = time.perf_counter()
    obs = [o for o in exp.plain_observables if o.label != "1"]
    paths = exp.paths()
    if len(paths) != 2:
        raise ConfigError("table1 needs a density with exactly two spanning paths")
    tab = functional_table(exp.density, paths, obs, exp.quadrature, normalize=True)
    norms = tab.norms
    rho = _rho_row(exp, obs)
    t_quad = time.perf_counter() - t0
    result = run(exp.density, obs, exp.cl)
    labels = [o.label for o in obs]
    recs = [result.record(lab) for lab in labels]
    cov = _select_cov(result, labels)
    fc = exp.cfg["fit"]
    kw = dict(n_boot=fc["n_boot"], seed=fc["seed"],
              covariance=cov if fc["correlated"] else None)
    fa = fit(recs, tab.values, labels=list(tab.path_labels), normalize=False,
             parametrization=sum_to_one(2), **kw)
    fb = fit(recs, np.vstack([tab.values, rho]), labels=list(tab.path_labels) + ["R"],
             normalize=False, parametrization=b_representation(), **kw)
    text = table1_text(labels, recs, fa.predict(tab.values), tab.values[0], tab.values[1], rho)
    a, ea = fa.coefficients, fa.errors
    summary = [
        f"(T_1,1) = {norms[0].real:+.4f} {norms[0].imag:+.4f}i   "
        f"(T_2,1) = {norms[1].real:+.4f} {norms[1].imag:+.4f}i",
        f"a = {a[0].real:.4f} {a[0].imag:+.4f}i ({ea[0].real:.1e}, {ea[0].imag:.1e}),  "
        f"{a[1].real:.4f} {a[1].imag:+.4f}i;  sum - 1 = {fa.constraint_residual:.1e};  "
        f"chi2/dof = {fa.chi2:.1f}/{fa.dof}",
        f"b = {fb.params[0].real:.4f} +- {fb.param_errors[0].real:.4f}   "
        f"chi2/dof = {fb.chi2:.1f}/{fb.dof}",
        f"quadrature {t_quad:.1f} s, CL {result.diagnostics['runtime_s']:.1f} s",
    ]
    body = text + "\n\n" + "\n".join(summary)
    print(body)
    res = {"observables": labels, "paths": dump_paths(paths),
           "norms": [_cpair(z) for z in norms],
           "T_hat": [[_cpair(v) for v in row] for row in tab.values],
           "T_rho": [_cpair(v) for v in rho],
           "cl": [r.to_json() for r in recs],
           "fit": fa.to_json(), "fit_b": fb.to_json(),
           "quadrature_seconds": t_quad}
    w = Writer(exp, "table1")
    w.json(res)
    w.csv(["f", "cl_re", "cl_im", "cl_err_re", "cl_err_im", "fit_re", "fit_im",
           "T1_re", "T1_im", "T2_re", "T2_im", "rho_re", "rho_im"],
          [[lab, r.mean.real, r.mean.imag, r.err.real, r.err.imag, f.real, f.imag,
            p.real, p.imag, m.real, m.imag, q.real, q.imag]
           for lab, r, f, p, m, q in zip(labels, recs, fa.predict(tab.values),
                                         tab.values[0], tab.values[1], rho)])
    w.text(body)
    return res


def _trace(d, cfg: CLConfig, walker: int, n_steps: int):
    """A fixed-step trajectory for plotting (not the production kernel)."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, walker])))
    z = cfg.start_points[walker % len(cfg.start_points)]
    out = [z]
    for xi in rng.standard_normal(n_steps):
        z = step(z, cfg.dt, xi, d)
        if d.is_cylinder:
            z = complex(z.real % (2 * math.pi), z.imag)
        out.append(z)
    return out


def cmd_plotdata(exp: Experiment, args) -> dict:
    w = Writer(exp, "plotdata")
    res = {}
    if args.histogram:
        hist = Histogram.load(args.histogram)
        if hist.counts.sum() <= 0:
            raise ConfigError(f"{args.histogram}: histogram is empty")
        xs, ys = hist.centers()
        P = hist.density()
        rows = [[x, y, P[i, j]] for i, x in enumerate(xs) for j, y in enumerate(ys)]
        w.csv(["x", "y", "P"], rows, suffix="grid.csv")
        res["grid"] = {"nx": len(xs), "ny": len(ys), "cylinder": hist.cylinder}
    if args.traces:
        rows = []
        for k in range(args.traces):
            for i, z in enumerate(_trace(exp.density, exp.cl, k, args.trace_steps)):
                rows.append([k, i, z.real, z.imag])
        w.csv(["walker", "step", "x", "y"], rows, suffix="traces.csv")
        res["traces"] = args.traces
    rows = []
    for p in exp.paths():
        for i, z in enumerate(sample_path(exp.density, p)):
            rows.append([p.label, i, z.real, z.imag])
    w.csv(["path", "index", "x", "y"], rows, suffix="paths.csv")
    res["files"] = [str(p) for p in w.written]
    w.json(res)
    print("\n".join(str(p) for p in w.written))
    return res


COMMANDS = {
    "analyze": (cmd_analyze, "singularity census and N_Gamma"),
    "sde": (cmd_sde, "SDE corank, path moments and residuals"),
    "integrate": (cmd_integrate, "path functionals on the observables"),
    "simulate": (cmd_simulate, "complex Langevin run"),
    "fit": (cmd_fit, "fit CL expectations as path-functional combinations"),
    "flux": (cmd_flux, "stationarity check through closed curves"),
    "table1": (cmd_table1, "quadrature columns, CL column and fit for a two-path density"),
    "plotdata": (cmd_plotdata, "CSV grids, walker traces and path overlays"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clpaths", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"clpaths {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", help="experiment JSON file")
        p.add_argument("--out", help="output directory (overrides the config)")
        if name == "fit":
            p.add_argument("--records", help="JSON output of a previous simulate run")
        if name in ("flux", "plotdata"):
            p.add_argument("--histogram", help="histogram file of a previous simulate run")
        if name == "plotdata":
            p.add_argument("--traces", type=int, default=0, help="number of walker traces")
            p.add_argument("--trace-steps", type=int, default=2000)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg["output"]["dir"] = args.out
        exp = Experiment(cfg)
        exp.out_override = args.out
        COMMANDS[args.command][0](exp, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidDensity, SingularityTooClose) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ClPathsError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
