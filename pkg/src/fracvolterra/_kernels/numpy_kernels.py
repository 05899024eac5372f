"""Vectorised numpy implementations of the O(n^2) kernels.

Each function loops once in Python over one grid axis and vectorises the
other. Signatures match :mod:`numba_kernels` exactly.
"""

import numpy as np
from scipy.linalg import toeplitz


def holder_sup(values, dt, lam):
    n = values.shape[0] - 1
    best = 0.0
    for lag in range(1, n + 1):
        diff = np.sqrt(((values[lag:] - values[:-lag]) ** 2).sum(axis=1))
        q = diff.max() / (lag * dt) ** lam
        if q > best:
            best = q
    return best


def walpha1_integrals(values, interior, end):
    n = values.shape[0] - 1
    out = np.zeros(n + 1)
    for k in range(1, n + 1):
        # h[m] = |f(t_k) - f(t_{k-m})| for m = 1..k
        h = np.sqrt(((values[k] - values[k - 1::-1]) ** 2).sum(axis=1))
        out[k] = h[:-1] @ interior[1:k] + h[-1] * end[k]
    return out


def w1malpha2_sup(values, qden, interior, end):
    n = values.shape[0] - 1
    best = 0.0
    for a in range(n):
        h = np.sqrt(((values[a + 1:] - values[a]) ** 2).sum(axis=1))
        mmax = h.shape[0]
        partial = np.zeros(mmax)
        partial[1:] = np.cumsum(h[:-1] * interior[1:mmax])
        total = partial + h * end[1:mmax + 1] + h / qden[1:mmax + 1]
        cand = total.max()
        if cand > best:
            best = cand
    return best


def frac_left_mid(values, interior, end):
    n = values.shape[0] - 1
    out = np.zeros((n, values.shape[1]))
    for c in range(n):
        fmid = 0.5 * (values[c] + values[c + 1])
        # breakpoint i sits on node c + 1 - i
        h = fmid - values[c::-1]
        out[c] = interior[1:c + 1] @ h[:-1] + end[c + 1] * h[-1]
    return out


def frac_right_mid(values, interior, end):
    n = values.shape[0] - 1
    out = np.zeros((n, values.shape[1]))
    for c in range(n):
        gmid = 0.5 * (values[c] + values[c + 1])
        # breakpoint i sits on node c + i
        h = gmid - values[c + 1:]
        k = n - c
        out[c] = interior[1:k] @ h[:-1] + end[k] * h[-1]
    return out


def toeplitz_apply(y, omega):
    k = y.shape[0]
    return toeplitz(omega[:k]) @ y
