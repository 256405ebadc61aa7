"""Inner loop of the margin-preserving swap chain.

The pure-Python loop is the reference; when numba is available the same
function is JIT-compiled. Both consume identical pre-drawn proposal arrays,
so results are bit-identical across backends.
"""
from __future__ import annotations

import os

import numpy as np


def _swap_chain(rows, cols, present, pick_a, pick_b):
    accepted = 0
    n = pick_a.shape[0]
    for t in range(n):
        ea = pick_a[t]
        eb = pick_b[t]
        i = rows[ea]
        j = cols[ea]
        k = rows[eb]
        l = cols[eb]
        if i == k or j == l:
            continue
        if present[i, l] or present[k, j]:
            continue
        present[i, j] = False
        present[k, l] = False
        present[i, l] = True
        present[k, j] = True
        cols[ea] = l
        cols[eb] = j
        accepted += 1
    return accepted


try:
    from numba import njit

    _swap_chain_jit = njit(cache=True, nogil=True)(_swap_chain)
except Exception:  # pragma: no cover - numba missing in some environments
    _swap_chain_jit = None


def run_swap_chain(
    rows: np.ndarray,
    cols: np.ndarray,
    present: np.ndarray,
    pick_a: np.ndarray,
    pick_b: np.ndarray,
) -> int:
    """Advance the swap chain through the proposal sequence, in place.

    Returns the number of accepted swaps. ``rows`` never changes (a swap
    keeps each edge in its row); ``cols`` and ``present`` are updated.
    """
    if _swap_chain_jit is not None and not os.environ.get("RELRAND_NO_NUMBA"):
        return int(_swap_chain_jit(rows, cols, present, pick_a, pick_b))
    return _swap_chain(rows, cols, present, pick_a, pick_b)
