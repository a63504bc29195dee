"""Cesaro-mean machinery for the weak law of large numbers.

Exact checks run on exhaustive product spaces; long horizons go through the
Monte-Carlo backend, where T is the sample mean over seeded paths and every
comparison carries a 3-standard-error allowance.
"""
import math
from itertools import product
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .lattice import signum_projection, truncation_band
from .mixingale import (
    MixingaleCertificate,
    check_mixingale,
    minimal_phi,
    uniform_bound_check,
    uniformity_profile,
)
from .processes import (
    RNG_NAME,
    WindowProcess,
    martingale_difference_from,
    partial_sums,
    sample_paths,
    sequence_from_spec,
)
from .report import CheckReport, PreconditionError, merge

EXACT_TOL = 1e-10
SE_FACTOR = 3.0


def mds_bound(n, B):
    """(1 + 4 B^2) / (2 sqrt n): bound on T|mean of g_1..g_n| for |f_i| <= B e."""
    return (1.0 + 4.0 * B * B) / (2.0 * math.sqrt(n))


@dataclass
class CesaroTrace:
    """T|mean_n| over a grid of horizons, with an optional reference curve.

    Exhaustive traces hold lattice elements; Monte-Carlo traces hold the
    (constant) estimate as a float plus its standard error in ``se``.
    """

    n_grid: list
    values: list
    bound: list = None
    se: list = None

    def max_components(self):
        return [v if isinstance(v, float) else v.max() for v in self.values]


@dataclass
class TraceRow:
    experiment: str
    backend: str
    seed: int
    n: int
    M: object
    B: object
    quantity: str
    value: float
    bound: object
    se: object
    passed: bool


def _check_bounded(f, B):
    for i, fi in enumerate(f.terms, start=1):
        over = np.abs(fi.values) - B
        if np.any(over > EXACT_TOL):
            atom = int(np.argmax(over))
            raise PreconditionError(f"|f_{i}| exceeds {B} at atom {atom} (value {fi.values[atom]!r})")


def mds_cesaro_run(f, B, n_grid=None, tol=EXACT_TOL):
    """Martingale-difference Cesaro bound for a bounded adapted sequence.

    Forms g_i = f_i - T_{i-1} f_i and verifies |g_i| <= 2B e, the orthogonality
    T(g_i g_j) = 0, T(s_n^2) = sum T(g_i^2), T(s_n^2) <= 4 n B^2 e and
    T|s_n / n| <= mds_bound(n, B) e.  Returns ``(report, trace)``.
    """
    _check_bounded(f, B)
    F = f.filtration
    T = F.global_op
    g = martingale_difference_from(f)
    s = partial_sums(g)
    n_max = len(g)
    n_grid = list(range(1, n_max + 1)) if n_grid is None else [n for n in n_grid if n <= n_max]

    def worst_of(name, gaps, tol_):
        gaps = list(gaps)
        if not gaps:
            return CheckReport(name, True, 0.0)
        v, where = max(gaps, key=lambda t: t[0])
        return CheckReport(name, v <= tol_, max(v, 0.0), where)

    parts = [
        worst_of(
            "|g_i| <= 2B e",
            ((float(np.max(np.abs(gi.values) - 2 * B)), {"i": i}) for i, gi in enumerate(g.terms, 1)),
            tol,
        )
    ]
    cross = []
    for i in range(n_max):
        for j in range(i + 1, n_max):
            cross.append((T(g.terms[i] * g.terms[j]).max_abs(), {"i": i + 1, "j": j + 1}))
    parts.append(worst_of("T(g_i g_j) = 0", cross, tol))

    rel, quad, abs_bound = [], [], []
    sq_sum = None
    values, bounds = [], []
    for n in range(1, n_max + 1):
        tg2 = T(g.terms[n - 1] ** 2)
        sq_sum = tg2 if sq_sum is None else sq_sum + tg2
        ts2 = T(s[n - 1] ** 2)
        scale = sq_sum.max_abs() or 1.0
        rel.append((float(np.max(np.abs(ts2.values - sq_sum.values))) / scale, {"n": n}))
        quad.append((float(np.max(ts2.values - 4 * n * B * B)), {"n": n}))
        tabs = T(abs(s[n - 1]) / n)
        abs_bound.append((float(np.max(tabs.values - mds_bound(n, B))), {"n": n}))
        if n in n_grid:
            values.append(tabs)
            bounds.append(mds_bound(n, B))
    parts.append(worst_of("T(s_n^2) = sum T(g_i^2)", rel, tol))
    parts.append(worst_of("T(s_n^2) <= 4nB^2 e", quad, tol))
    parts.append(worst_of("T|mean g| <= (1+4B^2)/(2 sqrt n) e", abs_bound, tol))
    return merge("martingale-difference Cesaro bound", parts, B=B), CesaroTrace(n_grid, values, bounds)


def signum_inequality_check(s, n, T=None, tol=1e-12):
    """e/sqrt(n) + s^2/n^(3/2) >= 2|s|/n pointwise and after applying T.

    Also checks that the gap equals (J e / n^(1/4) - s / n^(3/4))^2 with J the
    sign projection of s.
    """
    if n < 1:
        raise PreconditionError("n must be at least 1")
    e = s.space.unit()
    lhs = e / math.sqrt(n) + (s ** 2) / n ** 1.5
    rhs = 2.0 * abs(s) / n
    J = signum_projection(s)
    square = (J / n ** 0.25 - s / n ** 0.75) ** 2
    parts = [
        CheckReport("pointwise", True, float(max(0.0, np.max(rhs.values - lhs.values)))),
        CheckReport("square identity", True, float(np.max(np.abs(lhs.values - rhs.values - square.values)))),
    ]
    if T is not None:
        parts.append(CheckReport("after T", True, float(max(0.0, np.max(T(rhs).values - T(lhs).values)))))
    for p in parts:
        p.passed = p.max_violation <= tol
    equality = np.flatnonzero(np.abs(np.abs(s.values) - math.sqrt(n)) <= tol)
    return merge("signum inequality", parts, equality_atoms=equality.tolist())


@dataclass
class TelescopeParts:
    """fbar_n = tail + middle + head with middle = sum of ybar_{m,n}, m = -M+1..M."""

    M: int
    n: int
    tail: object
    middle: object
    head: object
    fbar: object
    y_bars: dict = field(default_factory=dict)

    def reconstruction_error(self):
        return float(np.max(np.abs((self.tail + self.middle + self.head - self.fbar).values)))


def _terms(f):
    return list(f.terms) if hasattr(f, "terms") else list(f)


def _cond_table(f, F, lo, hi, n):
    """values[k - lo][i - 1] = T_{i+k} f_i for offsets k in [lo, hi], i = 1..n."""
    fs = _terms(f)[:n]
    X = np.stack([fi.values for fi in fs], axis=1)
    out = np.empty((hi - lo + 1, n, X.shape[0]))
    for i in range(1, n + 1):
        for k in range(lo, hi + 1):
            out[k - lo, i - 1] = F.at(i + k).average(X[:, i - 1])
    return X.T, out


def telescope_trace(f, F, M, n_grid):
    """:class:`TelescopeParts` for every n in ``n_grid`` via prefix sums over i."""
    if M < 1:
        raise PreconditionError("M must be at least 1")
    n_grid = list(n_grid)
    n_max = max(n_grid)
    if n_max > len(_terms(f)):
        raise PreconditionError(f"sequence has {len(_terms(f))} terms, n = {n_max} requested")
    space = F.space
    raw, C = _cond_table(f, F, -M, M, n_max)
    # C[k + M] = T_{i+k} f_i
    tail_c = np.cumsum(raw - C[2 * M], axis=0)
    head_c = np.cumsum(C[0], axis=0)
    f_c = np.cumsum(raw, axis=0)
    y_c = {m: np.cumsum(C[m + M] - C[m + M - 1], axis=0) for m in range(-M + 1, M + 1)}
    out = []
    for n in n_grid:
        y_bars = {m: space.element(y_c[m][n - 1] / n) for m in y_c}
        middle = space.zero()
        for m in sorted(y_bars):
            middle = middle + y_bars[m]
        out.append(
            TelescopeParts(
                M,
                n,
                space.element(tail_c[n - 1] / n),
                middle,
                space.element(head_c[n - 1] / n),
                space.element(f_c[n - 1] / n),
                y_bars,
            )
        )
    return out


def telescope(f, F, M, n):
    return telescope_trace(f, F, M, [n])[0]


def ymn_trace(f, F, m, n_grid, tol=EXACT_TOL):
    """T|ybar_{m,n}| with y_{m,i} = T_{i+m} f_i - T_{i+m-1} f_i.

    Checks that (y_{m,i})_i is a martingale difference sequence for
    (T_{i+m})_i and compares the trace with mds_bound at the effective bound
    B = max_i max |T_{i+m} f_i|.  Returns ``(report, trace)``.
    """
    n_grid = list(n_grid)
    n_max = max(n_grid)
    T = F.global_op
    space = F.space
    _, C = _cond_table(f, F, m - 1, m, n_max)
    y = C[1] - C[0]
    B = float(np.max(np.abs(C[1]))) if C.size else 0.0
    mds_gap = 0.0
    for i in range(1, n_max + 1):
        yi = space.element(y[i - 1])
        mds_gap = max(mds_gap, F.at(i + m - 1)(yi).max_abs())
        mds_gap = max(mds_gap, float(np.max(np.abs(F.at(i + m)(yi).values - yi.values))))
    ycum = np.cumsum(y, axis=0)
    values, bounds, worst, where = [], [], 0.0, {}
    for n in n_grid:
        v = T(abs(space.element(ycum[n - 1] / n)))
        values.append(v)
        bounds.append(mds_bound(n, B))
        gap = float(np.max(v.values)) - mds_bound(n, B)
        if gap > worst:
            worst, where = gap, {"n": n}
    report = merge(
        f"ybar trace m={m}",
        [
            CheckReport("martingale difference structure", mds_gap <= tol, mds_gap),
            CheckReport("below Cesaro bound", worst <= tol, worst, where),
        ],
        B=B,
    )
    return report, CesaroTrace(n_grid, values, bounds)


def truncation_split(f, B):
    """(h, d) with h = (I - P) f, d = P f for P the truncation band of f at level B."""
    if B <= 0:
        raise PreconditionError("truncation level must be positive")
    P = truncation_band(f, B)
    return P.complement()(f), P(f)


@dataclass
class WLLNResult:
    report: CheckReport
    rows: list
    fbar: CesaroTrace
    gbar: CesaroTrace = None
    reports: list = field(default_factory=list)


def _default_certificate(f, F, M, mode):
    space = F.space
    fs = _terms(f)
    if mode == "t-abs":
        c = [F.global_op(abs(fi)) for fi in fs]
    else:
        c = [space.unit() for _ in fs]
    phi = minimal_phi(fs, F, c, M)
    return MixingaleCertificate(c, phi, phi_tail_zero=False)


def wlln_exhaustive(f, cert, n_grid, M_grid, B_grid, experiment="wlln", seed=0, tol=EXACT_TOL):
    """Weak-law bound chain on an exhaustive space.

    ``cert`` is a :class:`MixingaleCertificate` or one of "minimal" (c_i = e)
    and "t-abs" (c_i = T|f_i|), in which case the least mixingale numbers
    for the largest M are used.
    """
    F = f.filtration
    T = F.global_op
    fs = _terms(f)
    n_grid = [n for n in n_grid if n <= len(fs)]
    if not n_grid:
        raise PreconditionError("no horizon in n_grid fits the sequence length")
    M_max = max(M_grid)
    if isinstance(cert, str):
        cert = _default_certificate(fs, F, M_max + 1, cert)
    reports = []
    mix = check_mixingale(fs, F, cert, M_max + 1)
    reports.append(mix)
    if not mix.passed and mix.max_violation > tol:
        raise PreconditionError(f"certificate does not certify the sequence: {mix.line()}")

    top = max(fi.max_abs() for fi in fs)
    levels = sorted(set(float(b) for b in B_grid) | {top})
    profile = uniformity_profile(fs, T, levels)
    reports.append(uniform_bound_check(profile, fs, T))
    q = reports[-1].detail.get("bound")

    rows = []
    fbar_values = []
    chain_worst, chain_where = 0.0, {}
    parts_by_M = {M: telescope_trace(fs, F, M, n_grid) for M in M_grid}
    recon = max(p.reconstruction_error() for ps in parts_by_M.values() for p in ps)
    reports.append(CheckReport("telescoping reconstruction", recon <= 1e-12, recon))
    c_cum = np.cumsum(np.stack([ci.values for ci in cert.c[: max(n_grid)]]), axis=0)
    avg_c_worst = 0.0
    for idx, n in enumerate(n_grid):
        fbar = T(abs(parts_by_M[M_grid[0]][idx].fbar))
        fbar_values.append(fbar)
        cbar = c_cum[n - 1] / n
        if q is not None:
            avg_c_worst = max(avg_c_worst, float(np.max(T(f.space.element(cbar)).values - q.values)))
        for M in M_grid:
            p = parts_by_M[M][idx]
            y_sum = sum(T(abs(yb)).values for yb in p.y_bars.values())
            rhs = (cert.phi_at(M + 1) + cert.phi_at(M)) * cbar + y_sum
            split = T(abs(p.tail)).values + y_sum + T(abs(p.head)).values
            gap = max(float(np.max(fbar.values - split)), float(np.max(fbar.values - rhs)))
            if gap > chain_worst:
                chain_worst, chain_where = gap, {"n": n, "M": M}
            rows.append(
                TraceRow(experiment, "exhaustive", seed, n, M, "", "T|fbar_n|", fbar.max(),
                         float(np.max(rhs)), "", gap <= tol)
            )
    reports.append(CheckReport("mixingale bound chain", chain_worst <= tol, chain_worst, chain_where))
    if cert.c and all(np.allclose(ci.values, T(abs(fi)).values) for ci, fi in zip(cert.c, fs)) and q is not None:
        reports.append(CheckReport("bounded average of c_i", avg_c_worst <= tol, max(avg_c_worst, 0.0)))

    reports.append(_truncation_parts(fs, F, n_grid, M_max, B_grid, experiment, seed, rows, tol))
    report = merge("weak law bound chain", reports, M_grid=list(M_grid), B_grid=list(B_grid))
    return WLLNResult(report, rows, CesaroTrace(n_grid, fbar_values), reports=reports)


def _truncation_parts(fs, F, n_grid, M_max, B_grid, experiment, seed, rows, tol):
    """Bounded part below mds_bound(n, B); unbounded part below 2 max_i T P|f_i|."""
    T = F.global_op
    space = F.space
    n_max = max(n_grid)
    worst, where = 0.0, {}
    for B in B_grid:
        hs, ds = zip(*(truncation_split(fi, B) for fi in fs[:n_max]))
        tails = np.stack([T(truncation_band(fi, B)(abs(fi))).values for fi in fs[:n_max]])
        tail_sup = np.maximum.accumulate(tails, axis=0)
        _, Ch = _cond_table(hs, F, -M_max, M_max, n_max)
        _, Cd = _cond_table(ds, F, -M_max, M_max, n_max)
        for m in range(-M_max + 1, M_max + 1):
            yh = np.cumsum(Ch[m + M_max] - Ch[m + M_max - 1], axis=0)
            yd = np.cumsum(Cd[m + M_max] - Cd[m + M_max - 1], axis=0)
            for n in n_grid:
                th = T(abs(space.element(yh[n - 1] / n))).values
                td = T(abs(space.element(yd[n - 1] / n))).values
                gh = float(np.max(th)) - mds_bound(n, B)
                gd = float(np.max(td - 2.0 * tail_sup[n - 1]))
                for gap, side in ((gh, "bounded"), (gd, "truncated")):
                    if gap > worst:
                        worst, where = gap, {"n": n, "m": m, "B": B, "part": side}
                if m == M_max:
                    rows.append(
                        TraceRow(experiment, "exhaustive", seed, n, m, B, "T|ybar truncated|",
                                 float(np.max(td)), float(np.max(2.0 * tail_sup[n - 1])), "", gd <= tol)
                    )
    return CheckReport("truncated differences", worst <= tol, worst, where)


def window_bound(proc, horizon):
    """max_i max |f_i| over every window the process can see."""
    k, r = proc.spec.k, proc.memory
    full = np.array(list(product(range(k), repeat=r)), dtype=np.int64).reshape(-1, r)
    top = 0.0
    for i in range(1, horizon + 1):
        w = full.copy()
        absent = max(0, r - i)
        w[:, :absent] = -1
        top = max(top, float(np.max(np.abs(proc.term(i, w)))))
    return top


def monte_carlo_traces(spec, n_grid, n_paths, seed, chunk=4096):
    """Estimates of T|fbar_n| and T|gbar_n| with standard errors.

    Paths come from ``numpy.random.default_rng(seed)`` in chunks of ``chunk``;
    g_i = f_i - T_{i-1} f_i uses the analytic conditional expectation.
    Returns ``(fbar_trace, gbar_trace, B)``.
    """
    n_grid = sorted(int(n) for n in n_grid)
    if n_grid[-1] > spec.horizon:
        raise PreconditionError(f"horizon {spec.horizon} is shorter than n = {n_grid[-1]}")
    H = n_grid[-1]
    proc = WindowProcess(spec)
    rng = np.random.default_rng(seed)
    grid = np.asarray(n_grid, dtype=np.int64)
    acc = np.zeros((4, len(n_grid)))
    done = 0
    while done < n_paths:
        size = min(chunk, n_paths - done)
        paths = sample_paths(spec, size, rng)[:, :H]
        Fm = np.empty((size, H))
        Gm = np.empty((size, H))
        for i in range(1, H + 1):
            w = proc.window(paths, i)
            Fm[:, i - 1] = proc.term(i, w)
            Gm[:, i - 1] = Fm[:, i - 1] - proc.conditional(i, i - 1, w)
        fa, fs = _kernels.cesaro_abs_stats(Fm, grid)
        ga, gs = _kernels.cesaro_abs_stats(Gm, grid)
        acc += np.stack([fa, fs, ga, gs])
        done += size
    B = window_bound(proc, H)

    def trace(s1, s2, bound):
        mean = s1 / n_paths
        var = np.maximum(s2 / n_paths - mean * mean, 0.0) * n_paths / max(n_paths - 1, 1)
        se = np.sqrt(var / n_paths)
        return CesaroTrace(list(n_grid), [float(v) for v in mean], bound, [float(v) for v in se])

    return (
        trace(acc[0], acc[1], None),
        trace(acc[2], acc[3], [mds_bound(n, B) for n in n_grid]),
        B,
    )


def wlln_monte_carlo(spec, n_grid, n_paths, seed, experiment="wlln"):
    """Statistical weak-law evidence: the Cesaro trace and the martingale-difference bound."""
    fbar, gbar, B = monte_carlo_traces(spec, n_grid, n_paths, seed)
    rows, worst, where = [], -math.inf, {}
    for n, v, se, gv, gse, bound in zip(fbar.n_grid, fbar.values, fbar.se, gbar.values, gbar.se, gbar.bound):
        gap = gv - SE_FACTOR * gse - bound
        if gap > worst:
            worst, where = gap, {"n": n}
        rows.append(TraceRow(experiment, "monte-carlo", seed, n, "", "", "T|fbar_n|", v, "", se, True))
        rows.append(TraceRow(experiment, "monte-carlo", seed, n, "", B, "T|gbar_n|", gv, bound, gse, gap <= 0))
    report = CheckReport(
        "martingale-difference Cesaro bound (statistical)",
        worst <= 0,
        max(worst, 0.0),
        where,
        {"paths": n_paths, "rng": RNG_NAME, "B": B},
    )
    rise, rise_at = 0.0, {}
    for j in range(1, len(fbar.n_grid)):
        allowance = SE_FACTOR * math.hypot(fbar.se[j], fbar.se[j - 1])
        gap = fbar.values[j] - fbar.values[j - 1] - allowance
        if gap > rise:
            rise, rise_at = gap, {"n": fbar.n_grid[j]}
    decay = CheckReport(
        "Cesaro trace nonincreasing (statistical)", rise <= 0, rise, rise_at,
        {"last": fbar.values[-1], "last_se": fbar.se[-1]},
    )
    return WLLNResult(merge("weak law evidence (statistical)", [report, decay]), rows, fbar, gbar, [report, decay])


def wlln_experiment(spec, cert, schedule, backend="exhaustive", n_paths=20000, seed=None, atom_cap=None):
    """Run the weak-law experiment for a process spec.

    ``schedule`` maps "n_grid", "M_grid", "B_grid" to lists.
    """
    seed = spec.seed if seed is None else seed
    if backend == "monte-carlo":
        return wlln_monte_carlo(spec, schedule["n_grid"], n_paths, seed)
    f = sequence_from_spec(spec, atom_cap)
    return wlln_exhaustive(f, cert, schedule["n_grid"], schedule["M_grid"], schedule["B_grid"], seed=seed)
