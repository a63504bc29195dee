"""Verification suites run by the command line front end.

Each suite returns a list of :class:`CheckReport` and appends CSV rows.
"""
import dataclasses

import numpy as np

from .conditional import (
    averaging_check,
    operator_axioms,
    subspace_independence_check,
    verify_filtration,
)
from .lattice import (
    band_from_element,
    multiply,
    signum_projection,
    truncation_band,
)
from .mixingale import (
    MixingaleCertificate,
    check_mixingale,
    minimal_phi,
    t_mean_zero_check,
)
from .processes import coordinate_partition
from .report import CheckReport, PreconditionError, merge
from .wlln import TraceRow, mds_cesaro_run, wlln_exhaustive, wlln_monte_carlo

EXACT = 1e-12
STRUCTURAL_ATOMS = 4096


def structural_spec(spec, cap):
    """The process spec itself, or its longest prefix small enough to enumerate."""
    limit = min(cap, STRUCTURAL_ATOMS) if spec.k ** spec.horizon > cap else cap
    h = spec.horizon
    while h > 1 and spec.k ** h > limit:
        h -= 1
    return dataclasses.replace(spec, horizon=h)


def lattice_axioms(f, rng, cases=20):
    space = f.space
    e = space.unit()
    gaps = {name: 0.0 for name in (
        "sup + inf = f + g", "P commutes with sup and inf", "0 <= Pu <= u", "f-algebra laws",
        "truncation decomposition", "sign element identities", "Jordan decomposition",
    )}
    for _ in range(cases):
        u = space.element(np.abs(rng.standard_normal(space.size)))
        v = space.element(np.abs(rng.standard_normal(space.size)))
        w = space.element(rng.standard_normal(space.size))
        P = band_from_element(space.element(np.where(rng.random(space.size) < 0.5, w.values, 0.0)))

        def bump(name, val):
            gaps[name] = max(gaps[name], float(val))

        bump("sup + inf = f + g", np.max(np.abs((u.sup(v) + u.inf(v) - u - v).values)))
        bump("P commutes with sup and inf", max(
            np.max(np.abs((P(u.sup(w)) - P(u).sup(P(w))).values)),
            np.max(np.abs((P(u.inf(w)) - P(u).inf(P(w))).values)),
        ))
        bump("0 <= Pu <= u", max(0.0, -np.min(P(u).values), np.max((P(u) - u).values)))
        bump("f-algebra laws", max(
            np.max(np.abs((multiply(u, e) - u).values)),
            np.max(np.abs((multiply(multiply(u, v), w) - multiply(u, multiply(v, w))).values)),
            np.max(np.abs((multiply(u, v + w) - multiply(u, v) - multiply(u, w)).values)),
            max(0.0, -np.min(multiply(u, v).values)),
        ))
        c = float(rng.uniform(0, 2))
        Q = truncation_band(w, c)
        rest = Q.complement()(w)
        bump("truncation decomposition", max(
            np.max(np.abs((Q(w) + rest - w).values)), max(0.0, float(np.max(np.abs(rest.values) - c)))
        ))
        J = signum_projection(w)
        bump("sign element identities", max(
            np.max(np.abs((J * J - e).values)), np.max(np.abs((J * w - abs(w)).values))
        ))
        bump("Jordan decomposition", np.max(np.abs((w.pos() - w.neg() - w).values)))
    # also the terms of the process itself
    for fi in f.terms:
        J = signum_projection(fi)
        gaps["sign element identities"] = max(
            gaps["sign element identities"], float(np.max(np.abs((J * fi - abs(fi)).values)))
        )
    return [CheckReport(f"lattice: {k}", v <= EXACT, v) for k, v in gaps.items()]


def filtration_suite(f, rng, cases=10):
    F = f.filtration
    reports = [verify_filtration(F)]
    space = F.space
    ax, avg = [], []
    for i in F.indices():
        Ti = F.at(i)
        for _ in range(cases):
            a = space.element(rng.standard_normal(space.size))
            b = space.element(rng.standard_normal(space.size))
            ax.append(operator_axioms(Ti, a, b))
            block_vals = rng.standard_normal(Ti.partition.nblocks)
            avg.append(averaging_check(Ti, space.element(block_vals[Ti.partition.labels]), b))
    reports.append(merge("conditional expectation axioms", ax))
    reports.append(merge("averaging property T(fg) = f Tg", avg))
    return reports


def independence_suite(f):
    F = f.filtration
    space = F.space
    h = space.atoms.shape[1]
    parts = []
    for i in range(1, h + 1):
        for j in range(i + 1, h + 1):
            r = subspace_independence_check(
                coordinate_partition(space, i), coordinate_partition(space, j), F.global_op
            )
            r.worst = dict(r.worst, coords=(i, j))
            parts.append(r)
    return [merge("coordinate subspaces conditionally independent", parts)]


def certificate_for(cfg, f, M):
    F = f.filtration
    space = F.space
    mode = cfg.certificate["mode"]
    if mode == "explicit":
        c = [cfg.certificate["c"] * space.unit() for _ in f.terms]
        return MixingaleCertificate(c, cfg.certificate["phi"], cfg.certificate["phi_tail_zero"])
    if mode == "t-abs":
        c = [F.global_op(abs(fi)) for fi in f.terms]
    else:
        c = [space.unit() for _ in f.terms]
    return MixingaleCertificate(c, minimal_phi(f, F, c, M), phi_tail_zero=False)


def mixingale_suite(cfg, f):
    M = max(cfg.M_grid) + 1
    cert = certificate_for(cfg, f, M)
    report = check_mixingale(f, f.filtration, cert, M)
    report.detail["phi"] = cert.phi
    return [report, t_mean_zero_check(f, f.filtration)], cert


def martingale_bound_suite(cfg, f, seed, rows, experiment):
    B = max(fi.max_abs() for fi in f.terms)
    report, trace = mds_cesaro_run(f, B, cfg.n_grid)
    for n, v, b in zip(trace.n_grid, trace.values, trace.bound):
        rows.append(TraceRow(experiment, "exhaustive", seed, n, "", B, "T|gbar_n|", v.max(), b, "", v.max() <= b + 1e-10))
    return [report]


def wlln_suite(cfg, f, cert, seed, rows, experiment):
    try:
        res = wlln_exhaustive(
            f, cert, cfg.n_grid, cfg.M_grid, cfg.B_grid, experiment=experiment, seed=seed
        )
    except PreconditionError as exc:
        return [CheckReport("weak law bound chain", False, float("inf"), {"aborted": str(exc)})]
    rows.extend(res.rows)
    return res.reports


def monte_carlo_run(cfg, spec, seed, rows, experiment):
    res = wlln_monte_carlo(spec, cfg.n_grid, cfg.paths, seed, experiment=experiment)
    rows.extend(res.rows)
    return res
