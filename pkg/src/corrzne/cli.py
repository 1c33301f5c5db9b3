"""Batch experiment driver.

Experiments are described by flat ``key = value`` config files::

    [experiment]
    kind = method_comparison
    seed = 7

    [circuit]
    family = rb
    n_qubits = 2
    depth = 2
    n_circuits = 50

    [noise]
    presets = white, lowpass, pink, brown
    power = 1e-4

    [scaling]
    methods = pulse_stretch, global_fold, local_fold, gate_trotter
    lambdas = 1, 3, 5, 7, 9

    [simulation]
    trajectories = 3000

    [output]
    dir = results

``corrzne validate cfg.ini`` checks a config without running it;
``corrzne run cfg.ini`` writes CSV tables, SVG plots and a manifest.
"""
import argparse
import configparser
import csv
import hashlib
import io
import json
import logging
import platform
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _kernels, svg
from .arma import DEFAULT_POWER, PRESETS, model_spectrum, preset
from .circuits import CircuitSpec
from .filters import frequency_grid, normalized_max_ff
from .montecarlo import DEFAULT_LAMBDAS, AngleCache, RunConfig, _resolve, expectation_curve
from .scaling import METHODS, ScalingMethod, method_name
from .zne import extrapolate, fit_exponential, method_comparison

log = logging.getLogger("corrzne")

KINDS = ("spectra", "zne_single", "method_comparison", "filter_response")
FAMILIES = ("rb", "mirror", "qaoa", "cpmg", "free")

# section -> key -> (parser, default); ``None`` default means required
SCHEMA = {
    "experiment": {"kind": (str, None), "seed": (int, None)},
    "circuit": {"family": (str, "rb"), "n_qubits": (int, 2), "depth": (int, 2),
                "n_circuits": (int, 50), "circuit_seed": (int, -1),
                "delay": (int, 2), "pulses": (int, 2)},
    "noise": {"presets": (str, ",".join(PRESETS)), "power": (float, DEFAULT_POWER)},
    "scaling": {"methods": (str, ",".join(METHODS)),
                "lambdas": (str, ",".join(str(v) for v in DEFAULT_LAMBDAS))},
    "simulation": {"trajectories": (int, 3000), "n_taps": (int, 1024), "exact": (str, "false")},
    "output": {"dir": (str, "results"), "n_omega": (int, 2048)},
}


class ConfigError(ValueError):
    """Invalid experiment configuration; ``errors`` holds one message per problem."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    family: str = "rb"
    n_qubits: int = 2
    depth: int = 2
    n_circuits: int = 50
    circuit_seed: int = -1
    delay: int = 2
    pulses: int = 2
    presets: tuple = PRESETS
    power: float = DEFAULT_POWER
    methods: tuple = METHODS
    lambdas: tuple = DEFAULT_LAMBDAS
    trajectories: int = 3000
    n_taps: int = 1024
    exact: bool = False
    out_dir: str = "results"
    n_omega: int = 2048
    source: str = field(default="", compare=False)

    def record(self):
        rec = asdict(self)
        rec.pop("source")
        return rec

    @property
    def digest(self):
        text = json.dumps(self.record(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()

    def specs(self):
        base = self.seed if self.circuit_seed < 0 else self.circuit_seed
        params = {"delay": self.delay, "pulses": self.pulses}
        return [CircuitSpec(self.family, self.n_qubits, self.depth, base + i, params)
                for i in range(self.n_circuits)]

    def models(self):
        return {k: preset(k, self.power) for k in self.presets}

    def run_config(self):
        return RunConfig(self.trajectories, self.seed, self.lambdas, exact=self.exact,
                         n_taps=self.n_taps)


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_SECTION = re.compile(r"^\s*\[([^\]]+)\]")
_KEY = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


def _line_index(text):
    """``(section, key) -> line number`` for line-anchored messages."""
    where, section = {}, None
    for no, line in enumerate(text.splitlines(), 1):
        m = _SECTION.match(line)
        if m:
            section = m.group(1).strip().lower()
            where.setdefault((section, None), no)
            continue
        m = _KEY.match(line)
        if m and section is not None:
            where[(section, m.group(1).strip().lower())] = no
    return where


def _split(value):
    return tuple(v.strip() for v in value.split(",") if v.strip())


def parse_config(text, path="<config>", overrides=None):
    """Parse and check a config; raises :class:`ConfigError` listing every problem."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError([f"{path}: {exc}".replace("\n", " ")]) from None
    where = _line_index(text)
    errors = []

    def err(section, key, msg):
        line = where.get((section, key)) or where.get((section, None))
        anchor = f"{path}:{line}" if line else f"{path}"
        label = f"[{section}] {key}" if key else f"[{section}]"
        errors.append(f"{anchor}: {label}: {msg}")

    raw = {}
    for section in parser.sections():
        sec = section.lower()
        if sec not in SCHEMA:
            err(sec, None, "unknown section")
            continue
        for key, value in parser.items(section):
            if key not in SCHEMA[sec]:
                err(sec, key, "unknown key")
                continue
            conv = SCHEMA[sec][key][0]
            try:
                raw[key] = conv(value.strip())
            except ValueError:
                err(sec, key, f"cannot parse {value!r} as {conv.__name__}")
                raw[key] = SCHEMA[sec][key][1]
    for sec, keys in SCHEMA.items():
        for key, (_, default) in keys.items():
            if key not in raw and default is None:
                err(sec, key, "missing required key")
            raw.setdefault(key, default)
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    kind = str(raw["kind"]).lower()
    if raw["kind"] is not None and kind not in KINDS:
        err("experiment", "kind", f"unknown experiment kind {kind!r}; expected one of {KINDS}")
    family = raw["family"].lower()
    if family not in FAMILIES:
        err("circuit", "family", f"unknown circuit family {family!r}")
    if raw["n_qubits"] not in (1, 2):
        err("circuit", "n_qubits", "n_qubits must be 1 or 2")
    for key in ("n_circuits", "trajectories", "n_omega"):
        if raw[key] < 1:
            err("circuit" if key == "n_circuits" else
                "simulation" if key == "trajectories" else "output", key, "must be >= 1")
    presets = tuple(p.lower() for p in _split(raw["presets"]))
    for p in presets:
        if p not in PRESETS:
            err("noise", "presets", f"missing preset {p!r}; expected one of {PRESETS}")
    if not presets:
        err("noise", "presets", "no presets given")
    if not raw["power"] > 0:
        err("noise", "power", "power must be positive")
    methods = []
    for m in _split(raw["methods"]):
        try:
            methods.append(method_name(m))
        except ValueError as exc:
            err("scaling", "methods", str(exc))
    try:
        lambdas = tuple(float(v) for v in _split(raw["lambdas"]))
        lambdas = tuple(int(v) if v == int(v) else v for v in lambdas)
    except ValueError:
        err("scaling", "lambdas", f"cannot parse {raw['lambdas']!r} as numbers")
        lambdas = ()
    if kind in ("zne_single", "method_comparison") and len(lambdas) < 3:
        err("scaling", "lambdas", "need at least three scale factors")
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        err("scaling", "lambdas", "scale factors must be strictly increasing")
    for m in methods:
        for lam in lambdas:
            try:
                ScalingMethod(m, lam)
            except ValueError as exc:
                err("scaling", "lambdas", str(exc))
    exact = str(raw["exact"]).lower()
    if exact not in ("true", "false", "1", "0", "yes", "no"):
        err("simulation", "exact", f"expected a boolean, got {exact!r}")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        kind=kind, seed=int(raw["seed"]), family=family, n_qubits=raw["n_qubits"],
        depth=raw["depth"], n_circuits=raw["n_circuits"], circuit_seed=raw["circuit_seed"],
        delay=raw["delay"], pulses=raw["pulses"], presets=presets, power=float(raw["power"]),
        methods=tuple(dict.fromkeys(methods)), lambdas=lambdas,
        trajectories=raw["trajectories"], n_taps=raw["n_taps"],
        exact=exact in ("true", "1", "yes"), out_dir=str(raw["dir"]), n_omega=raw["n_omega"],
        source=str(path))


def load_config(path, overrides=None):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read config: {exc.strerror}"]) from None
    return parse_config(text, path, overrides)


def validate(path):
    """List of problems with a config file (empty when valid)."""
    try:
        load_config(path)
    except ConfigError as exc:
        return exc.errors
    return []


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    Path(path).write_text(buf.getvalue())


def _versions():
    import scipy

    out = {"corrzne": __version__, "python": platform.python_version(),
           "numpy": np.__version__, "scipy": scipy.__version__}
    if _kernels.HAVE_NUMBA:
        import numba

        out["numba"] = numba.__version__
    return out


def _manifest(cfg, out_dir, files, threads):
    out = {
        "config": cfg.record(),
        "config_hash": cfg.digest,
        "seed": cfg.seed,
        "threads": threads,
        "backend": _kernels.BACKEND,
        "versions": _versions(),
        "outputs": {f.name: hashlib.sha256(f.read_bytes()).hexdigest() for f in sorted(files)},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return path


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def run_spectra(cfg, out):
    omega = np.linspace(0.0, np.pi, cfg.n_omega)
    models = cfg.models()
    cols = [model_spectrum(m)(omega) for m in models.values()]
    header = ["omega [rad/gate]"] + [f"S_{k} [rad^2]" for k in models]
    files = [out / "spectra.csv", out / "spectra.svg"]
    write_csv(files[0], header, zip(omega, *cols))
    series = [(k, omega[1:], c[1:]) for k, c in zip(models, cols)]
    files[1].write_text(svg.line_plot(series, "Noise spectra", "omega [rad/gate]",
                                      "S(omega) [rad^2]", logx=True, logy=True))
    (out / "models.json").write_text(
        json.dumps({k: m.to_record() for k, m in models.items()}, indent=2) + "\n")
    return files + [out / "models.json"]


def run_zne_single(cfg, out, threads=1, backend=None):
    circuit, target = cfg.specs()[0].build()
    circuit, rc = _resolve((circuit, target), cfg.run_config())
    methods = ("ideal",) + tuple(m for m in cfg.methods if m != "ideal")
    curve_rows, fit_rows, files = [], [], []
    for name, model in cfg.models().items():
        cache = AngleCache(backend=backend)
        series, stars = [], []
        for m in methods:
            log.info("zne_single %s %s", name, m)
            curve = expectation_curve(circuit, m, model, rc, 0, cache, backend)
            fit = fit_exponential(curve)
            est = extrapolate(fit)
            curve_rows += [(name, m, lam, e, s) for lam, e, s in curve.points]
            fit_rows.append((name, m, fit.A, fit.B, fit.c, est.value_at_zero, fit.residual_rms,
                             fit.converged))
            lam = np.linspace(0.0, max(cfg.lambdas), 100)
            series += [(f"{m}", curve.lambdas, curve.means), (f"{m} fit", lam, fit(lam))]
            stars.append((m, 0.0, est.value_at_zero))
        path = out / f"zne_{name}.svg"
        path.write_text(svg.line_plot(series, f"ZNE under {name} noise", "lambda",
                                      "expectation", markers=stars))
        files.append(path)
    files += [out / "curves.csv", out / "fits.csv"]
    write_csv(files[-2], ["spectrum", "method", "lambda [1]", "mean [1]", "stderr [1]"],
              curve_rows)
    write_csv(files[-1], ["spectrum", "method", "A [1]", "B [1]", "c [1/lambda]",
                          "zne_value [1]", "residual_rms [1]", "converged"], fit_rows)
    return files


def run_method_comparison(cfg, out, threads=1, backend=None):
    specs = cfg.specs()
    done = []

    def progress(i):
        done.append(i)
        log.info("circuit %d/%d done", len(done), len(specs))

    res = method_comparison(specs, cfg.methods, cfg.models(), cfg.run_config(), threads,
                            backend, progress)
    files = [out / "delta.csv", out / "curves.csv"]
    write_csv(files[0], ["spectrum", "method", "lambda [1]", "mean_delta [1]", "std_delta [1]",
                         "shot_band [1]", "n_circuits"], res.rows())
    rows = []
    for sp in res.spectra:
        for m in res.methods:
            for i, c in enumerate(res.curves[(sp, m)]):
                rows += [(sp, m, i, lam, e, s) for lam, e, s in c.points]
    write_csv(files[1], ["spectrum", "method", "circuit", "lambda [1]", "mean [1]",
                         "stderr [1]"], rows)
    for sp in res.spectra:
        series = [(m, res.lambdas, res.mean_delta(sp, m)) for m in res.methods if m != "ideal"]
        path = out / f"delta_{sp}.svg"
        path.write_text(svg.line_plot(series, f"Relative scaling error, {sp} noise", "lambda",
                                      "mean Delta"))
        files.append(path)
    return files


def run_filter_response(cfg, out):
    circuit, _ = cfg.specs()[0].build()
    omega = frequency_grid(cfg.n_omega)
    rows, files = [], []
    for m in cfg.methods:
        curves = normalized_max_ff(circuit, m, cfg.lambdas, omega)
        for lam, curve in curves.items():
            rows += [(m, lam, w, v) for w, v in zip(omega, curve)]
        series = [(f"lambda={lam}", omega, c) for lam, c in curves.items()]
        path = out / f"ff_{m}.svg"
        path.write_text(svg.line_plot(series, f"Normalized filter function, {m}",
                                      "omega [rad/gate]", "F / max F"))
        files.append(path)
    path = out / "filter_functions.csv"
    write_csv(path, ["method", "lambda [1]", "omega [rad/gate]", "ff_normalized [1]"], rows)
    return [path] + files


def run(path, seed=None, threads=1, out_dir=None, backend=None):
    """Execute a config; returns the output directory."""
    cfg = load_config(path, {"seed": seed, "dir": out_dir})
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %s (seed %d, backend %s) into %s", cfg.kind, cfg.seed, _kernels.BACKEND,
             out)
    if cfg.kind == "spectra":
        files = run_spectra(cfg, out)
    elif cfg.kind == "zne_single":
        files = run_zne_single(cfg, out, threads, backend)
    elif cfg.kind == "method_comparison":
        files = run_method_comparison(cfg, out, threads, backend)
    else:
        files = run_filter_response(cfg, out)
    _manifest(cfg, out, files, threads)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(prog="corrzne", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads over circuits")
    p_run.add_argument("--out-dir", default=None, help="override the output directory")
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "validate":
        problems = validate(args.config)
        for p in problems:
            print(p, file=sys.stderr)
        if not problems:
            print(f"{args.config}: ok")
        return 2 if problems else 0
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return 2
    try:
        out = run(args.config, args.seed, args.threads, args.out_dir)
    except ConfigError as exc:
        for p in exc.errors:
            print(p, file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
