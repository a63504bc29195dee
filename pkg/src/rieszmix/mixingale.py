"""Mixingale certificates, minimal mixingale numbers and T-uniformity profiles."""
import math
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeElement, truncation_band
from .report import CheckReport

SLACK = 1e-10
DECAY_EPS = 1e-8


@dataclass
class MixingaleCertificate:
    """Witnesses (c_i) in E_+ and (Phi_m) in R_+ for a mixingale.

    ``phi[0]`` is Phi_1.  With ``phi_tail_zero`` the numbers past the end of
    ``phi`` are taken to be 0.
    """

    c: list
    phi: list
    phi_tail_zero: bool = False

    def __post_init__(self):
        self.phi = [float(p) for p in self.phi]
        if any(not (p >= 0) for p in self.phi):
            raise ValueError("mixingale numbers must be nonnegative")
        if any(not ci.is_positive() for ci in self.c):
            raise ValueError("every c_i must lie in the positive cone")

    def phi_at(self, m):
        if m <= len(self.phi):
            return self.phi[m - 1]
        if self.phi_tail_zero:
            return 0.0
        raise IndexError(f"certificate has no Phi_{m} and no zero-tail flag")

    def decays(self, eps=DECAY_EPS):
        """Evidence that Phi_m -> 0: an exact zero tail, or some Phi_m below ``eps``."""
        if self.phi_tail_zero:
            return True
        return bool(self.phi) and min(self.phi) < eps


def _terms(f):
    return list(f.terms) if hasattr(f, "terms") else list(f)


def _lag_sides(f, F, M):
    """Yield (i, m, side, lhs) for both mixingale conditions, m = 1..M."""
    T = F.global_op
    for i, fi in enumerate(_terms(f), start=1):
        for m in range(1, M + 1):
            yield i, m, "i", T(abs(F.at(i - m)(fi)))
            yield i, m, "ii", T(abs(fi - F.at(i + m)(fi)))


def check_mixingale(f, F, cert, M, slack=SLACK):
    """Verify T|T_{i-m} f_i| <= Phi_m c_i and T|f_i - T_{i+m} f_i| <= Phi_{m+1} c_i."""
    worst, where = -math.inf, {}
    for i, m, side, lhs in _lag_sides(f, F, M):
        phi = cert.phi_at(m if side == "i" else m + 1)
        c = cert.c[i - 1].values
        rhs = np.where(c > 0, math.inf, 0.0) if math.isinf(phi) else phi * c
        gap = float(np.max(lhs.values - rhs))
        if gap > worst:
            worst, where = gap, {"i": i, "m": m, "side": side}
    if worst == -math.inf:
        worst = 0.0
    ok = worst <= slack
    decays = cert.decays()
    return CheckReport(
        "mixingale conditions",
        ok and decays,
        max(worst, 0.0),
        where if not ok else {},
        {"decay_evidence": decays, "max_lag": M},
    )


def _least_scalar(lhs, c):
    """Smallest s >= 0 with lhs <= s c componentwise (inf if impossible)."""
    lhs = np.asarray(lhs)
    c = np.asarray(c)
    support = c > 0
    if np.any(lhs[~support] > 0):
        return math.inf
    if not np.any(support):
        return 0.0
    return max(0.0, float(np.max(lhs[support] / c[support])))


def minimal_phi(f, F, c, M):
    """Least mixingale numbers Phi_1..Phi_{M+1} for the given (c_i) and lags 1..M.

    Phi_m covers condition (i) at lag m and condition (ii) at lag m - 1.
    """
    phi = [0.0] * (M + 1)
    T = F.global_op
    for i, fi in enumerate(_terms(f), start=1):
        ci = c[i - 1].values
        for m in range(1, M + 2):
            s = _least_scalar(T(abs(F.at(i - m)(fi))).values, ci)
            if m >= 2:
                s = max(s, _least_scalar(T(abs(fi - F.at(i + m - 1)(fi))).values, ci))
            phi[m - 1] = max(phi[m - 1], s)
    return phi


def t_mean_zero_check(f, F, tol=SLACK):
    """T f_i = 0 for every term."""
    worst, where = 0.0, {}
    for i, fi in enumerate(_terms(f), start=1):
        gap = F.global_op(fi).max_abs()
        if gap > worst:
            worst, where = gap, {"i": i}
    return CheckReport("T-mean zero", worst <= tol, worst, where)


@dataclass
class UniformityProfile:
    c_grid: list
    envelope: list

    def max_components(self):
        return [e.max() for e in self.envelope]

    def first_below(self, eps=DECAY_EPS):
        """Index of the first grid level whose envelope is below ``eps`` everywhere."""
        for j, env in enumerate(self.envelope):
            if env.max() <= eps:
                return j
        return None


def uniformity_profile(fs, T, c_grid):
    """Envelope sup_alpha T P_{(|f_alpha| - c e)^+} |f_alpha| for each level c."""
    c_grid = [float(c) for c in c_grid]
    if any(c < 0 for c in c_grid) or any(b <= a for a, b in zip(c_grid, c_grid[1:])):
        raise ValueError("c_grid must be nonnegative and strictly increasing")
    fs = list(fs)
    space = T.space
    envelope = []
    for c in c_grid:
        env = np.zeros(space.size)
        for fa in fs:
            a = abs(fa)
            env = np.maximum(env, T(truncation_band(fa, c)(a)).values)
        envelope.append(LatticeElement(space, env))
    for lo, hi in zip(envelope, envelope[1:]):
        if not hi.le(lo, 1e-12):
            raise ArithmeticError("uniformity envelope increased with the truncation level")
    return UniformityProfile(c_grid, envelope)


def uniform_bound_check(profile, fs, T, level=None, eps=DECAY_EPS, tol=SLACK):
    """T|f_alpha| <= envelope(K) + K e for every member.

    K is ``profile.c_grid[level]``, by default the first level whose envelope
    is below ``eps``.
    """
    fs = list(fs)
    if level is None:
        level = profile.first_below(eps)
        if level is None:
            return CheckReport(
                "T-uniform family bounded", False, math.inf, {"reason": "envelope never below eps"}
            )
    K = profile.c_grid[level]
    ref = profile.envelope[level] + K * T.space.unit()
    worst, where = 0.0, {}
    for a, fa in enumerate(fs):
        gap = float(np.max(T(abs(fa)).values - ref.values))
        if gap > worst:
            worst, where = gap, {"alpha": a}
    return CheckReport(
        "T-uniform family bounded", worst <= tol, worst, where, {"K": K, "bound": ref}
    )


def uniformity_split_check(fa, T, c, tol=1e-12):
    """T|f| = T P|f| + T (I - P)|f| with (I - P)|f| <= c e, for P the truncation band at c."""
    P = truncation_band(fa, c)
    a = abs(fa)
    head, rest = T(P(a)), P.complement()(a)
    recon = float(np.max(np.abs(T(a).values - head.values - T(rest).values)))
    over = float(np.max(rest.values - c))
    worst = max(recon, over)
    return CheckReport("truncation split", worst <= tol, max(worst, 0.0))
