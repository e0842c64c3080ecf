"""Pure-numpy window kernels; fallback when the C extension is absent.

The tap-accumulation order matches the Cython kernels so both backends
produce the same floating-point results.
"""

import numpy as np


def window_scores(G: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pre-activation phrase scores A[k,l] = sum_j G[k,l+j-r]*w[j] + b[k].

    Positions beyond the sequence ends contribute zero.
    """
    K, L = G.shape
    taps = w.shape[0]
    r = (taps - 1) // 2
    A = np.zeros((K, L))
    for j in range(taps):
        off = j - r
        lo, hi = max(0, -off), min(L, L - off)
        if lo < hi:
            A[:, lo:hi] += w[j] * G[:, lo + off:hi + off]
    A += b[:, None]
    return A


def window_scores_backward(G: np.ndarray, w: np.ndarray, dA: np.ndarray):
    """Gradients of window_scores w.r.t. G, w and b."""
    K, L = G.shape
    taps = w.shape[0]
    r = (taps - 1) // 2
    dG = np.zeros_like(G)
    dw = np.zeros_like(w)
    for j in range(taps):
        off = j - r
        lo, hi = max(0, -off), min(L, L - off)
        if lo < hi:
            dG[:, lo + off:hi + off] += w[j] * dA[:, lo:hi]
            dw[j] = np.sum(dA[:, lo:hi] * G[:, lo + off:hi + off])
    db = dA.sum(axis=1)
    return dG, dw, db
