import numpy as np
import pytest

import oracles
from rieszmix.lattice import SampleSpace
from rieszmix.conditional import CondExpectation
from rieszmix.mixingale import MixingaleCertificate
from rieszmix.processes import ProcessSpec, build_product_space, random_adapted, sequence_from_spec
from rieszmix.report import PreconditionError
from rieszmix.wlln import (
    mds_bound,
    mds_cesaro_run,
    monte_carlo_traces,
    signum_inequality_check,
    telescope,
    telescope_trace,
    truncation_split,
    wlln_exhaustive,
    wlln_experiment,
    wlln_monte_carlo,
    ymn_trace,
)


def test_mds_bound_value():
    assert mds_bound(4, 1.0) == 1.25
    assert mds_bound(16, 0.5) == pytest.approx(2 / 8)


def test_fair_coin_cesaro(coins3):
    f = sequence_from_spec(ProcessSpec("independent-innovations", 4))
    report, trace = mds_cesaro_run(f, 1.0)
    assert report.passed
    v4 = trace.values[3]
    assert np.allclose(v4.values, 0.375, rtol=0, atol=1e-12)
    assert oracles.coin_mean_abs_cesaro(4) == 0.375
    assert trace.bound[3] == 1.25


def test_mds_run_rejects_unbounded():
    f = sequence_from_spec(ProcessSpec("independent-innovations", 3, theta=(2.0,)))
    with pytest.raises(PreconditionError):
        mds_cesaro_run(f, 1.0)


def test_mds_run_random(rng):
    _, F = build_product_space(ProcessSpec("independent-innovations", 6, support=(2, 0, -1), probs=(0.2, 0.3, 0.5)))
    f = random_adapted(F, 6, 1.5, rng)
    report, trace = mds_cesaro_run(f, 1.5)
    assert report.passed, report.line()
    for v, b in zip(trace.values, trace.bound):
        assert v.max() <= b


def test_signum_inequality_equality_case():
    S = SampleSpace.uniform(2)
    r = signum_inequality_check(S.element([2.0, -2.0]), 4, CondExpectation.trivial(S))
    assert r.passed
    assert r.detail["equality_atoms"] == [0, 1]
    r = signum_inequality_check(S.element([0.0, 7.0]), 9)
    assert r.passed and r.detail["equality_atoms"] == []
    with pytest.raises(PreconditionError):
        signum_inequality_check(S.unit(), 0)


def test_telescope_parts_ma1(ma1):
    F = ma1.filtration
    for M in (1, 2, 3):
        p = telescope(ma1, F, M, 6)
        assert p.reconstruction_error() <= 1e-12
        # adapted terms: nothing beyond T_{i+M}
        assert p.tail.max_abs() <= 1e-12
        if M >= 2:
            assert p.head.max_abs() <= 1e-12
    p = telescope(ma1, F, 1, 6)
    assert p.head.max_abs() > 0.1


def test_telescope_random_nonadapted(rng):
    _, F = build_product_space(ProcessSpec("independent-innovations", 5))
    terms = [F.space.element(rng.standard_normal(F.space.size)) for _ in range(12)]
    for p in telescope_trace(terms, F, 3, [1, 5, 12]):
        assert p.reconstruction_error() <= 1e-12
        assert p.tail.max_abs() > 0


def test_ymn_ma1_matches_binomial(ma1):
    F = ma1.filtration
    report, trace = ymn_trace(ma1, F, 0, [1, 2, 4, 6])
    assert report.passed
    for n, v in zip(trace.n_grid, trace.values):
        assert np.allclose(v.values, oracles.coin_mean_abs_cesaro(n), atol=1e-12)
    report, trace = ymn_trace(ma1, F, 1, [2, 6])
    assert all(v.max_abs() <= 1e-12 for v in trace.values)
    report, trace = ymn_trace(ma1, F, -1, [6])
    assert report.passed
    # y_{-1,i} = 0.5 eps_{i-1} for i >= 2, and 0 for i = 1
    assert np.allclose(trace.values[0].values, 0.5 * oracles.coin_mean_abs_cesaro(5) * 5 / 6, atol=1e-12)


def test_truncation_split_example():
    S = SampleSpace.uniform(3)
    h, d = truncation_split(S.element([2.0, -1.0, 0.5]), 1.0)
    assert h.values.tolist() == [0.0, -1.0, 0.5]
    assert d.values.tolist() == [2.0, 0.0, 0.0]
    with pytest.raises(PreconditionError):
        truncation_split(S.unit(), 0.0)


def test_wlln_exhaustive_ma():
    spec = ProcessSpec("moving-average", 8, theta=(1.0, 0.5), support=(2.0, 0.0, -1.0), probs=(0.25, 0.25, 0.5))
    f = sequence_from_spec(spec)
    for mode in ("minimal", "t-abs"):
        res = wlln_exhaustive(f, mode, [1, 2, 4, 8], [1, 2, 4], [0.5, 1.0, 2.0])
        assert res.report.passed, [r.line() for r in res.reports]
    vals = res.fbar.max_components()
    assert vals[-1] < vals[0]


def test_wlln_exhaustive_rejects_bad_certificate(ma1):
    cert = MixingaleCertificate([ma1.space.unit()] * 6, [0.1], phi_tail_zero=True)
    with pytest.raises(PreconditionError):
        wlln_exhaustive(ma1, cert, [2, 4], [1], [1.0])


def test_wlln_custom_process():
    f = sequence_from_spec(ProcessSpec("custom", 7, memory=2, amplitude=1.5, seed=4))
    res = wlln_exhaustive(f, "minimal", [1, 3, 7], [1, 2], [0.5, 1.0])
    assert [r.name for r in res.reports][:3] == ["mixingale conditions", "T-uniform family bounded", "telescoping reconstruction"]
    assert res.report.passed, [r.line() for r in res.reports]


def test_monte_carlo_reproducible():
    spec = ProcessSpec("independent-innovations", 64, seed=3)
    a = wlln_monte_carlo(spec, [4, 16, 64], 3000, 9)
    b = wlln_monte_carlo(spec, [4, 16, 64], 3000, 9)
    assert a.fbar.values == b.fbar.values and a.gbar.se == b.gbar.se
    assert a.report.passed


def test_monte_carlo_matches_exhaustive():
    spec = ProcessSpec("moving-average", 8, theta=(1.0, -0.5), support=(2.0, 0.0, -1.0), probs=(0.25, 0.25, 0.5))
    f = sequence_from_spec(spec)
    exact = wlln_exhaustive(f, "minimal", [2, 4, 8], [1], [1.0]).fbar.max_components()
    fbar, gbar, B = monte_carlo_traces(spec, [2, 4, 8], 20000, 5)
    assert B == 2.5  # eps_i = 2, eps_{i-1} = -1
    for v, se, ex in zip(fbar.values, fbar.se, exact):
        assert abs(v - ex) <= 3 * se


def test_experiment_dispatch():
    spec = ProcessSpec("independent-innovations", 4)
    sched = {"n_grid": [2, 4], "M_grid": [1], "B_grid": [1.0]}
    assert wlln_experiment(spec, "minimal", sched).report.passed
    assert wlln_experiment(spec, "minimal", sched, backend="monte-carlo", n_paths=500).fbar.se is not None
