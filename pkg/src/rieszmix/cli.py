"""Command line front end: ``rieszmix CONFIG [--backend ...] [--seed N] [--out DIR] [--suite NAME] [--dry-run]``.

Exit status: 0 all checks pass, 1 a verification failed, 2 configuration
error, 3 resource cap exceeded.
"""
import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import _kernels, suites
from .config import (
    ATOM_CAP_ENV,
    SUITES,
    ConfigError,
    ResourceCapError,
    atom_cap,
    normalize_suites,
    parse_config,
)
from .processes import RNG_NAME, AtomCapExceeded, sequence_from_spec

log = logging.getLogger("rieszmix")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3
CSV_SCHEMA = "# rieszmix-trace v1"
CSV_FIELDS = ["experiment", "backend", "seed", "n", "M", "B", "quantity", "value", "bound", "se", "passed"]

CLAIMS = {
    "lattice-axioms": "vector lattice, f-algebra and band projection laws",
    "filtration": "tower property, T e = e, positivity, averaging, T|f| >= |Tf|",
    "independence": "coordinate subspaces are T-conditionally independent (TPTQe = TPQe = TQTPe)",
    "mixingale": "mixingale conditions T|T_{i-m} f_i| <= Phi_m c_i, T|f_i - T_{i+m} f_i| <= Phi_{m+1} c_i; T f_i = 0",
    "martingale-bound": "T(s_n^2) = sum T(g_i^2) <= 4nB^2 e and T|gbar_n| <= (1+4B^2)/(2 sqrt n) e",
    "wlln": "telescoped bound chain for T|fbar_n| and truncated differences",
}


def _fmt(v):
    if isinstance(v, bool):
        return "pass" if v else "fail"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def run(cfg, out_dir=None):
    """Execute the configured suites; returns ``(exit_status, reports_by_suite)``."""
    out = Path(out_dir or cfg.output)
    cap = atom_cap()
    rows, results = [], {}
    for trial in range(cfg.trials):
        spec = cfg.spec(trial)
        seed = spec.seed
        rng = np.random.default_rng(seed)
        experiment = f"{spec.kind}-t{trial}"
        sspec = spec if cfg.backend == "exhaustive" else suites.structural_spec(spec, cap)
        try:
            f = sequence_from_spec(sspec, cap)
        except AtomCapExceeded as exc:
            raise ResourceCapError(str(exc)) from None
        note = "" if sspec.horizon == spec.horizon else f" (exhaustive prefix, horizon {sspec.horizon})"
        cert = None
        mc = None
        for suite in cfg.checks:
            log.info("trial %d: suite %s", trial, suite)
            if suite in ("martingale-bound", "wlln") and cfg.backend == "monte-carlo":
                if mc is None:
                    mc = suites.monte_carlo_run(cfg, spec, seed, rows, experiment)
                reps = mc.reports[:1] if suite == "martingale-bound" else mc.reports[1:]
            elif suite == "lattice-axioms":
                reps = suites.lattice_axioms(f, rng)
            elif suite == "filtration":
                reps = suites.filtration_suite(f, rng)
            elif suite == "independence":
                reps = suites.independence_suite(f)
            elif suite == "mixingale":
                reps, cert = suites.mixingale_suite(cfg, f)
            elif suite == "martingale-bound":
                reps = suites.martingale_bound_suite(cfg, f, seed, rows, experiment)
            else:
                if cert is None:
                    cert = suites.certificate_for(cfg, f, max(cfg.M_grid) + 1)
                reps = suites.wlln_suite(cfg, f, cert, seed, rows, experiment)
            statistical = mc is not None and suite in ("martingale-bound", "wlln")
            results.setdefault(suite, []).append((trial, "" if statistical else note, reps))

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trace.csv", "w", newline="") as fh:
        fh.write(CSV_SCHEMA + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for row in rows:
            d = dataclasses.asdict(row)
            w.writerow([_fmt(d[k]) for k in CSV_FIELDS])

    ok = all(r.passed for per in results.values() for _, _, reps in per for r in reps)
    with open(out / "summary.txt", "w") as fh:
        fh.write(summary_text(cfg, results))
    return (EXIT_OK if ok else EXIT_FAIL), results


def summary_text(cfg, results):
    lines = [
        f"backend: {cfg.backend}",
        f"seed: {cfg.seed}  trials: {cfg.trials}  rng: {RNG_NAME}",
        f"numba kernels: {'on' if _kernels.HAS_NUMBA else 'off'}",
        "",
    ]
    for suite in SUITES:
        if suite not in results:
            continue
        lines.append(f"== {suite}: {CLAIMS[suite]}")
        for trial, note, reps in results[suite]:
            for r in reps:
                lines.append(f"  trial {trial}{note} {r.line()}")
    total = [r for per in results.values() for _, _, reps in per for r in reps]
    failed = sum(not r.passed for r in total)
    lines.append("")
    lines.append(f"{len(total) - failed}/{len(total)} checks passed")
    return "\n".join(lines) + "\n"


def build_parser():
    p = argparse.ArgumentParser(prog="rieszmix", description=__doc__.splitlines()[0])
    p.add_argument("config", help="TOML experiment configuration")
    p.add_argument("--backend", choices=["exhaustive", "monte-carlo"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (overrides run.output)")
    p.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    p.add_argument("--dry-run", action="store_true", help="print the resolved config and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _resolve(args):
    overrides = {}
    if args.backend:
        overrides["backend"] = args.backend
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = parse_config(Path(args.config).read_text(), overrides)
    if args.suite:
        cfg.checks = normalize_suites(args.suite)
    if args.out:
        cfg.output = args.out
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _resolve(args)
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    if args.dry_run:
        print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    try:
        status, results = run(cfg)
    except ResourceCapError as exc:
        print(f"resource cap: {exc} (set {ATOM_CAP_ENV} to raise it)", file=sys.stderr)
        return EXIT_CAP
    except OSError as exc:
        print(f"error writing to {cfg.output}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    sys.stdout.write(summary_text(cfg, results))
    return status


if __name__ == "__main__":
    sys.exit(main())
