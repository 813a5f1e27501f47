"""Inner loops for sector-state updates.

Pure-numpy fallbacks are kept alongside optional numba-jitted versions; both
compute identical updates (disjoint row/column pairs, no reductions), so
results do not depend on which path runs.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is available in CI, this is a safety net
    HAVE_NUMBA = False


def _rotate_rows_numpy(psi, src, dst, signs, cos_t, sin_t):
    ms = 1j * sin_t * signs
    a = psi[src]
    b = psi[dst]
    psi[src] = cos_t * a + ms[:, None] * b
    psi[dst] = ms[:, None] * a + cos_t * b


def _rotate_cols_numpy(psi, src, dst, signs, cos_t, sin_t):
    ms = 1j * sin_t * signs
    a = psi[:, src]
    b = psi[:, dst]
    psi[:, src] = cos_t * a + ms[None, :] * b
    psi[:, dst] = ms[None, :] * a + cos_t * b


def _hop_rows_numpy(out, psi, src, dst, signs):
    out[src] += signs[:, None] * psi[dst]
    out[dst] += signs[:, None] * psi[src]


def _hop_cols_numpy(out, psi, src, dst, signs):
    out[:, src] += signs[None, :] * psi[:, dst]
    out[:, dst] += signs[None, :] * psi[:, src]


if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _rotate_rows_numba(psi, src, dst, signs, cos_t, sin_t):
        ncols = psi.shape[1]
        for p in prange(len(src)):
            a, b, s = src[p], dst[p], signs[p]
            ms = 1j * sin_t * s
            for j in range(ncols):
                x = psi[a, j]
                y = psi[b, j]
                psi[a, j] = cos_t * x + ms * y
                psi[b, j] = ms * x + cos_t * y

    @njit(cache=True, parallel=True)
    def _rotate_cols_numba(psi, src, dst, signs, cos_t, sin_t):
        nrows = psi.shape[0]
        for i in prange(nrows):
            for p in range(len(src)):
                a, b, s = src[p], dst[p], signs[p]
                ms = 1j * sin_t * s
                x = psi[i, a]
                y = psi[i, b]
                psi[i, a] = cos_t * x + ms * y
                psi[i, b] = ms * x + cos_t * y

    @njit(cache=True, parallel=True)
    def _hop_rows_numba(out, psi, src, dst, signs):
        ncols = psi.shape[1]
        for p in prange(len(src)):
            a, b, s = src[p], dst[p], signs[p]
            for j in range(ncols):
                out[a, j] += s * psi[b, j]
                out[b, j] += s * psi[a, j]

    @njit(cache=True, parallel=True)
    def _hop_cols_numba(out, psi, src, dst, signs):
        nrows = psi.shape[0]
        for i in prange(nrows):
            for p in range(len(src)):
                a, b, s = src[p], dst[p], signs[p]
                out[i, a] += s * psi[i, b]
                out[i, b] += s * psi[i, a]

    rotate_rows = _rotate_rows_numba
    rotate_cols = _rotate_cols_numba
    hop_rows = _hop_rows_numba
    hop_cols = _hop_cols_numba
else:  # pragma: no cover
    rotate_rows = _rotate_rows_numpy
    rotate_cols = _rotate_cols_numpy
    hop_rows = _hop_rows_numpy
    hop_cols = _hop_cols_numpy
