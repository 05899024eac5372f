"""Closed-form weights for integrating ``u**p`` against piecewise-linear data.

Every singular integral in the package has the shape

    int_0^U h(u) u**p du,    -2 < p < 0,

where ``h`` is known at breakpoints ``0 = u_0 < u_1 < ... < u_M = U`` and is
interpolated linearly in between. On each cell the two hat functions are
integrated against ``u**p`` exactly, so the quadrature carries no error beyond
the interpolation itself. When ``p <= -1`` the integral only exists if
``h(0) = 0``; the weight attached to ``u_0`` is then reported as zero.
"""

import numpy as np


def _antiderivative(u, q):
    # int u**q du, valid for q != -1 and u > 0 (u == 0 allowed when q > -1)
    with np.errstate(divide="ignore"):
        return np.power(u, q + 1.0) / (q + 1.0)


def cell_weights(u, p):
    """Per-cell hat-function weights.

    Returns ``(c_lo, c_hi)`` of length ``M`` where cell ``i`` spans
    ``[u[i], u[i+1]]`` and ``c_lo[i]``/``c_hi[i]`` multiply ``h(u[i])`` and
    ``h(u[i+1])``. ``c_lo[0]`` is NaN whenever it diverges (``u[0] == 0`` and
    ``p <= -1``).
    """
    u = np.asarray(u, dtype=float)
    if p <= -2.0 or p == -1.0:
        raise ValueError(f"unsupported weight exponent {p}")
    a, b = u[:-1], u[1:]
    length = b - a
    with np.errstate(invalid="ignore"):
        ip = _antiderivative(b, p) - _antiderivative(a, p)
        ip1 = _antiderivative(b, p + 1.0) - _antiderivative(a, p + 1.0)
        c_hi = (ip1 - a * ip) / length
        c_lo = (b * ip - ip1) / length
    if u[0] == 0.0:
        # first cell: only the u**(p+1) term survives for the upper hat
        c_hi[0] = np.power(b[0], p + 1.0) / (p + 2.0)
        c_lo[0] = _first_lo(b[0], p)
    return c_lo, c_hi


def _first_lo(b, p):
    if p <= -1.0:
        return np.nan
    # int_0^b (b - u)/b * u**p du
    return np.power(b, p + 1.0) / (p + 1.0) - np.power(b, p + 1.0) / (p + 2.0)


def node_weights(u, p):
    """Weights ``w`` with ``int_0^{u[-1]} h u**p du = sum_i w[i] h(u[i])``.

    ``w[0]`` is forced to zero when it would diverge; callers guarantee
    ``h(u[0]) = 0`` in that case.
    """
    c_lo, c_hi = cell_weights(u, p)
    w = np.zeros(len(u))
    w[1:] += c_hi
    w[:-1] += np.nan_to_num(c_lo, nan=0.0)
    return w


def running_weights(u, p):
    """Weights for integrals truncated at each breakpoint.

    For ``k >= 1`` the integral up to ``u[k]`` equals
    ``sum_{i=1}^{k-1} interior[i] h(u[i]) + end[k] h(u[k])`` (plus
    ``c_lo[0] h(u[0])`` when that weight is finite; it is not used here
    because every caller has ``h(u[0]) = 0``).
    """
    c_lo, c_hi = cell_weights(u, p)
    interior = np.zeros(len(u))
    end = np.zeros(len(u))
    end[1:] = c_hi
    interior[1:-1] = c_hi[:-1] + c_lo[1:]
    return interior, end
