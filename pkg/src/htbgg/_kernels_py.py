"""Numpy fallback for the compiled GF(p) kernels (same contract as ``_kernels``)."""

import numpy as np


def rref_modp(arr, p):
    """Reduce ``arr`` to reduced row echelon form mod ``p`` in place; return pivot columns."""
    rows, cols = arr.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(arr[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            arr[[r, k], c:] = arr[[k, r], c:]
        inv = pow(int(arr[r, c]), p - 2, p)
        if inv != 1:
            arr[r, c:] = arr[r, c:] * inv % p
        col = arr[:, c].copy()
        col[r] = 0
        others = np.flatnonzero(col)
        if others.size:
            arr[others, c:] = (arr[others, c:] - np.outer(col[others], arr[r, c:])) % p
        pivots.append(c)
        r += 1
    return pivots
