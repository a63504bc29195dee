"""Experiment configuration: a TOML file with [process], [certificate], [schedule] and [run] tables.

Example::

    [process]
    kind = "moving-average"
    horizon = 8
    theta = [1.0, 0.5]

    [certificate]
    mode = "explicit"
    c = 1.0
    phi = [0.5]
    phi_tail_zero = true

    [schedule]
    n_grid = [2, 4, 8]

    [run]
    backend = "exhaustive"
    seed = 3
    checks = ["mixingale", "wlln"]

Only [process].kind and [process].horizon are required.
"""
import difflib
import os
import sys
from dataclasses import asdict, dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .processes import DEFAULT_ATOM_CAP, KINDS, ProcessSpec

SUITES = ("lattice-axioms", "filtration", "independence", "mixingale", "martingale-bound", "wlln")
SUITE_ALIASES = {"lemma41": "martingale-bound", "axioms": "lattice-axioms"}
BACKENDS = ("exhaustive", "monte-carlo")
CERT_MODES = ("minimal", "t-abs", "explicit")
ATOM_CAP_ENV = "RIESZMIX_ATOM_CAP"
MC_GRID = (4, 16, 64, 256, 1024)


class ConfigError(ValueError):
    pass


class ResourceCapError(RuntimeError):
    pass


_SCHEMA = {
    "process": {"kind", "horizon", "theta", "support", "probs", "memory", "amplitude"},
    "certificate": {"mode", "c", "phi", "phi_tail_zero"},
    "schedule": {"n_grid", "M_grid", "B_grid"},
    "run": {"backend", "seed", "trials", "paths", "output", "checks"},
}


@dataclass
class ExperimentConfig:
    process: dict
    certificate: dict = field(default_factory=lambda: {"mode": "minimal"})
    n_grid: list = field(default_factory=list)
    M_grid: list = field(default_factory=lambda: [1, 2, 4, 8])
    B_grid: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])
    backend: str = "exhaustive"
    seed: int = 0
    trials: int = 1
    paths: int = 20000
    output: str = "rieszmix-out"
    checks: list = field(default_factory=lambda: list(SUITES))

    def spec(self, trial=0):
        return ProcessSpec(seed=self.seed + trial, **self.process)

    def to_dict(self):
        return asdict(self)


def atom_cap():
    raw = os.environ.get(ATOM_CAP_ENV)
    if raw is None:
        return DEFAULT_ATOM_CAP
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{ATOM_CAP_ENV}={raw!r} is not an integer") from None


def _reject_unknown(table, allowed, where):
    for key in table:
        if key not in allowed:
            hint = difflib.get_close_matches(key, sorted(allowed), n=1)
            msg = f"unknown key {where}{key!r}"
            raise ConfigError(msg + (f"; did you mean {hint[0]!r}?" if hint else ""))


def _grid(name, values, cast):
    if not isinstance(values, list) or not values:
        raise ConfigError(f"schedule.{name} must be a nonempty list")
    try:
        out = [cast(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"schedule.{name} has a non-numeric entry") from None
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"schedule.{name} must be strictly increasing")
    if any(v <= 0 for v in out):
        raise ConfigError(f"schedule.{name} entries must be positive")
    return out


def parse_config(text, overrides=None):
    """Parse and validate configuration text; defaults are filled in.

    ``overrides`` replaces keys of the [run] table before validation.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    if overrides:
        raw.setdefault("run", {}).update(overrides)
    _reject_unknown(raw, _SCHEMA, "")
    for section, table in raw.items():
        if not isinstance(table, dict):
            raise ConfigError(f"{section!r} must be a table")
        _reject_unknown(table, _SCHEMA[section], f"{section}.")

    proc = dict(raw.get("process", {}))
    for key in ("kind", "horizon"):
        if key not in proc:
            raise ConfigError(f"process.{key} is required")
    if proc["kind"] not in KINDS:
        raise ConfigError(f"process.kind must be one of {KINDS}, got {proc['kind']!r}")
    for key in ("theta", "support", "probs"):
        if key in proc:
            proc[key] = tuple(proc[key])
    try:
        ProcessSpec(**proc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"process: {exc}") from None

    cfg = ExperimentConfig(process=proc)
    run = raw.get("run", {})
    cfg.backend = run.get("backend", cfg.backend)
    if cfg.backend not in BACKENDS:
        raise ConfigError(f"run.backend must be one of {BACKENDS}, got {cfg.backend!r}")
    for key in ("seed", "trials", "paths"):
        if key in run:
            if not isinstance(run[key], int) or isinstance(run[key], bool):
                raise ConfigError(f"run.{key} must be an integer")
            setattr(cfg, key, run[key])
    if cfg.trials < 1 or cfg.paths < 2:
        raise ConfigError("run.trials must be >= 1 and run.paths >= 2")
    cfg.output = str(run.get("output", cfg.output))
    if "checks" in run:
        cfg.checks = normalize_suites(run["checks"])

    cert = dict(raw.get("certificate", {}))
    cert.setdefault("mode", "minimal")
    if cert["mode"] not in CERT_MODES:
        raise ConfigError(f"certificate.mode must be one of {CERT_MODES}")
    if cert["mode"] == "explicit":
        if "phi" not in cert:
            raise ConfigError("certificate.phi is required for explicit certificates")
        cert.setdefault("c", 1.0)
        cert.setdefault("phi_tail_zero", False)
        if cert["c"] < 0 or any(p < 0 for p in cert["phi"]):
            raise ConfigError("certificate.c and certificate.phi must be nonnegative")
    cfg.certificate = cert

    sched = raw.get("schedule", {})
    horizon = proc["horizon"]
    if "n_grid" in sched:
        cfg.n_grid = _grid("n_grid", sched["n_grid"], int)
    elif cfg.backend == "monte-carlo":
        cfg.n_grid = [n for n in MC_GRID if n <= horizon] or [horizon]
    else:
        cfg.n_grid = sorted({n for n in (1, 2, 4, 8, 16, 32) if n <= horizon} | {horizon})
    if cfg.n_grid[-1] > horizon:
        raise ConfigError(f"schedule.n_grid goes past the horizon {horizon}")
    if "M_grid" in sched:
        cfg.M_grid = _grid("M_grid", sched["M_grid"], int)
    if "B_grid" in sched:
        cfg.B_grid = _grid("B_grid", sched["B_grid"], float)

    if cfg.backend == "exhaustive":
        spec = cfg.spec()
        cap = atom_cap()
        if spec.k ** spec.horizon > cap:
            raise ResourceCapError(
                f"exhaustive backend needs {spec.k}^{spec.horizon} atoms, over the cap {cap}; "
                f"use backend = \"monte-carlo\" or raise {ATOM_CAP_ENV}"
            )
    return cfg


def normalize_suites(names):
    out = []
    for name in names:
        name = SUITE_ALIASES.get(name, name)
        if name not in SUITES:
            hint = difflib.get_close_matches(name, SUITES, n=1)
            raise ConfigError(
                f"unknown suite {name!r}" + (f"; did you mean {hint[0]!r}?" if hint else "")
            )
        if name not in out:
            out.append(name)
    return [s for s in SUITES if s in out]
