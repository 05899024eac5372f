"""Loop implementations compiled with numba.

Same contracts as :mod:`numpy_kernels`; the functions here stay importable
(uncompiled) when numba is missing, which keeps them testable as plain
Python on tiny inputs.
"""

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def _dist(values, i, j):
    acc = 0.0
    for c in range(values.shape[1]):
        d = values[i, c] - values[j, c]
        acc += d * d
    return math.sqrt(acc)


@njit(cache=True)
def holder_sup(values, dt, lam):
    n = values.shape[0] - 1
    best = 0.0
    for lag in range(1, n + 1):
        den = (lag * dt) ** lam
        for a in range(n + 1 - lag):
            q = _dist(values, a + lag, a) / den
            if q > best:
                best = q
    return best


@njit(cache=True)
def walpha1_integrals(values, interior, end):
    n = values.shape[0] - 1
    out = np.zeros(n + 1)
    for k in range(1, n + 1):
        acc = 0.0
        for m in range(1, k):
            acc += _dist(values, k, k - m) * interior[m]
        out[k] = acc + _dist(values, k, 0) * end[k]
    return out


@njit(cache=True)
def w1malpha2_sup(values, qden, interior, end):
    n = values.shape[0] - 1
    best = 0.0
    for a in range(n):
        partial = 0.0
        for m in range(1, n - a + 1):
            h = _dist(values, a + m, a)
            total = partial + h * end[m] + h / qden[m]
            if total > best:
                best = total
            partial += h * interior[m]
    return best


@njit(cache=True)
def frac_left_mid(values, interior, end):
    n = values.shape[0] - 1
    dim = values.shape[1]
    out = np.zeros((n, dim))
    for c in range(n):
        for d in range(dim):
            fmid = 0.5 * (values[c, d] + values[c + 1, d])
            acc = 0.0
            for i in range(1, c + 1):
                acc += interior[i] * (fmid - values[c + 1 - i, d])
            out[c, d] = acc + end[c + 1] * (fmid - values[0, d])
    return out


@njit(cache=True)
def frac_right_mid(values, interior, end):
    n = values.shape[0] - 1
    dim = values.shape[1]
    out = np.zeros((n, dim))
    for c in range(n):
        k = n - c
        for d in range(dim):
            gmid = 0.5 * (values[c, d] + values[c + 1, d])
            acc = 0.0
            for i in range(1, k):
                acc += interior[i] * (gmid - values[c + i, d])
            out[c, d] = acc + end[k] * (gmid - values[n, d])
    return out


@njit(cache=True)
def toeplitz_apply(y, omega):
    k, r = y.shape
    out = np.zeros((k, r))
    for a in range(k):
        for b in range(k):
            w = omega[abs(a - b)]
            for j in range(r):
                out[a, j] += w * y[b, j]
    return out
