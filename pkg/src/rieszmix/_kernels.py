"""Numeric inner loops.

Each kernel has a numba version and a pure-numpy version with identical
semantics.  The numba path is used when numba imports cleanly and the
environment variable ``RIESZMIX_DISABLE_NUMBA`` is unset (or "0").
"""
import os

import numpy as np

_DISABLE = os.environ.get("RIESZMIX_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLE:
        raise ImportError("numba disabled by RIESZMIX_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def block_average_numpy(values, weights, labels, nblocks):
    """Weighted block mean of each column of ``values``, broadcast back to atoms.

    ``values`` has shape (n_atoms,) or (n_atoms, k).
    """
    values = np.asarray(values, dtype=np.float64)
    squeeze = values.ndim == 1
    v = values[:, None] if squeeze else values
    k = v.shape[1]
    block_mass = np.bincount(labels, weights=weights, minlength=nblocks)
    flat = (labels[:, None] * k + np.arange(k)[None, :]).ravel()
    sums = np.bincount(flat, weights=(v * weights[:, None]).ravel(), minlength=nblocks * k)
    means = sums.reshape(nblocks, k) / block_mass[:, None]
    out = means[labels]
    return out[:, 0] if squeeze else out


def cesaro_abs_stats_numpy(terms, grid):
    """Per-path running sums of ``terms`` (paths x horizon).

    Returns ``(sum_abs, sum_sq)`` over paths of |S_n / n| for each n in ``grid``
    (1-based horizons).
    """
    partial = np.cumsum(terms, axis=1)[:, np.asarray(grid) - 1]
    a = np.abs(partial / np.asarray(grid, dtype=np.float64)[None, :])
    return a.sum(axis=0), (a * a).sum(axis=0)


if HAS_NUMBA:

    @njit(cache=True)
    def _block_average_2d(v, weights, labels, nblocks):
        n, k = v.shape
        mass = np.zeros(nblocks)
        sums = np.zeros((nblocks, k))
        for a in range(n):
            b = labels[a]
            w = weights[a]
            mass[b] += w
            for j in range(k):
                sums[b, j] += w * v[a, j]
        out = np.empty((n, k))
        for a in range(n):
            b = labels[a]
            for j in range(k):
                out[a, j] = sums[b, j] / mass[b]
        return out

    @njit(cache=True)
    def _cesaro_abs_stats(terms, grid):
        p, h = terms.shape
        g = grid.shape[0]
        sum_abs = np.zeros(g)
        sum_sq = np.zeros(g)
        for r in range(p):
            s = 0.0
            j = 0
            for t in range(h):
                s += terms[r, t]
                if j < g and grid[j] == t + 1:
                    a = abs(s / grid[j])
                    sum_abs[j] += a
                    sum_sq[j] += a * a
                    j += 1
        return sum_abs, sum_sq

    def block_average(values, weights, labels, nblocks):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            return _block_average_2d(values[:, None], weights, labels, nblocks)[:, 0]
        return _block_average_2d(np.ascontiguousarray(values), weights, labels, nblocks)

    def cesaro_abs_stats(terms, grid):
        return _cesaro_abs_stats(
            np.ascontiguousarray(terms, dtype=np.float64), np.asarray(grid, dtype=np.int64)
        )

else:
    block_average = block_average_numpy
    cesaro_abs_stats = cesaro_abs_stats_numpy
