"""Batch block-OMP decode kernels.

Decoding thousands of measurement vectors is the hot loop of every experiment
sweep, so the per-signal greedy iteration is compiled with numba when it is
available. Set the environment variable ``BLOCKSENSE_NO_NUMBA=1`` (or install
without numba) to run the pure-numpy fallback instead; both paths implement
the same selection rule, least-squares refit, and conditioning check, and
``benchmarks/bench_bomp.py`` compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("BLOCKSENSE_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _env not in ("", "0", "false")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled via BLOCKSENSE_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def _bomp_batch_numpy(E, offsets, Y, k, ls_tol):
    """Vectorized-per-signal fallback decoder.

    Returns (theta, supports, status): the K x L coefficient matrix, the
    k x L selected block indices in selection order, and a per-signal status
    that is 0 on success or the number of blocks selected when the stacked
    sub-dictionary failed the conditioning check.
    """
    m_rows, n_cols = E.shape
    n_blocks = offsets.shape[0] - 1
    n_signals = Y.shape[1]
    et = np.ascontiguousarray(E.T)
    theta = np.zeros((n_cols, n_signals))
    supports = np.full((k, n_signals), -1, dtype=np.int64)
    status = np.zeros(n_signals, dtype=np.int64)

    for sig in range(n_signals):
        y = Y[:, sig].copy()
        r = y.copy()
        used = np.zeros(n_blocks, dtype=bool)
        cols: list[int] = []
        coef = np.zeros(0)
        ok = True
        for t in range(k):
            c = et @ r
            scores = np.add.reduceat(c * c, offsets[:-1])
            scores[used] = -1.0
            best = int(np.argmax(scores))
            used[best] = True
            supports[t, sig] = best
            cols.extend(range(int(offsets[best]), int(offsets[best + 1])))
            es = E[:, cols]
            u, s, vt = np.linalg.svd(es, full_matrices=False)
            if len(cols) > m_rows or s[-1] <= ls_tol * s[0]:
                status[sig] = t + 1
                ok = False
                break
            coef = vt.T @ ((u.T @ y) / s)
            r = y - es @ coef
        if ok:
            theta[cols, sig] = coef
    return theta, supports, status


def _bomp_batch_loops(E, offsets, Y, k, ls_tol):
    # Same algorithm written with explicit loops so numba can compile it.
    m_rows, n_cols = E.shape
    n_blocks = offsets.shape[0] - 1
    n_signals = Y.shape[1]
    et = np.ascontiguousarray(E.T)
    theta = np.zeros((n_cols, n_signals))
    supports = np.full((k, n_signals), -1, dtype=np.int64)
    status = np.zeros(n_signals, dtype=np.int64)
    cols = np.empty(n_cols, dtype=np.int64)

    for sig in range(n_signals):
        y = Y[:, sig].copy()
        r = y.copy()
        used = np.zeros(n_blocks, dtype=np.bool_)
        coef = np.zeros(0)
        ncols = 0
        ok = True
        for t in range(k):
            c = et @ r
            best = -1
            best_score = -1.0
            for j in range(n_blocks):
                if used[j]:
                    continue
                ss = 0.0
                for col in range(offsets[j], offsets[j + 1]):
                    ss += c[col] * c[col]
                if ss > best_score:
                    best_score = ss
                    best = j
            used[best] = True
            supports[t, sig] = best
            for col in range(offsets[best], offsets[best + 1]):
                cols[ncols] = col
                ncols += 1
            es = np.empty((m_rows, ncols))
            for a in range(ncols):
                src = cols[a]
                for row in range(m_rows):
                    es[row, a] = E[row, src]
            u, s, vt = np.linalg.svd(es, full_matrices=False)
            if ncols > m_rows or s[s.shape[0] - 1] <= ls_tol * s[0]:
                status[sig] = t + 1
                ok = False
                break
            coef = vt.T @ ((u.T @ y) / s)
            r = y - es @ coef
        if ok:
            for a in range(ncols):
                theta[cols[a], sig] = coef[a]
    return theta, supports, status


if HAVE_NUMBA:
    _bomp_batch_jit = njit(cache=True)(_bomp_batch_loops)
else:
    _bomp_batch_jit = None


def bomp_batch(E, offsets, Y, k, ls_tol):
    """Decode every column of Y against E with the active backend."""
    e = np.ascontiguousarray(E, dtype=float)
    offs = np.ascontiguousarray(offsets, dtype=np.int64)
    y = np.ascontiguousarray(Y, dtype=float)
    if HAVE_NUMBA:
        return _bomp_batch_jit(e, offs, y, int(k), float(ls_tol))
    return _bomp_batch_numpy(e, offs, y, int(k), float(ls_tol))
