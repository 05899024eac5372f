"""One-sided fractional derivatives and two routes to the pathwise integral.

``rs_integral_forpart`` evaluates the Stieltjes integral through fractional
integration by parts; ``rs_integral_sums`` is the plain left-point
Riemann-Stieltjes sum and serves as an independent check of the former.

Fractional derivatives here are real-valued: the ``(-1)**alpha`` phase of the
right-sided derivative is dropped. In the integration-by-parts formula the
two phases multiply to ``(-1)**alpha * (-1)**(1-alpha) = -1``, and that sign
is applied explicitly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._quad import node_weights, running_weights
from .errors import InvalidArgumentError
from .grid import SampledPath, check_same_grid

_EDGE = 1e-12


class Side(enum.Enum):
    LEFT = "a+"
    RIGHT = "b-"


@dataclass(frozen=True)
class FracDerivSpec:
    side: Side
    alpha: float
    a: float
    b: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.a < self.b:
            raise InvalidArgumentError("need a < b")


def default_alpha(hurst: float) -> float:
    """``1.2 (1 - H)`` pulled inside ``(1 - H, 1/2)``.

    ``hurst`` is the Hölder order of the integrator (``1`` for smooth paths).
    """
    if not 0.5 < hurst <= 1.0:
        raise InvalidArgumentError(f"integrator regularity must lie in (1/2, 1], got {hurst}")
    lo, hi = 1.0 - hurst, 0.5
    margin = 0.05 * (hi - lo)
    return min(max(1.2 * (1.0 - hurst), lo + margin), hi - margin)


def _check_unit_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")


def _interior_nodes(path, lo, hi):
    t = path.grid.nodes
    tol = _EDGE * path.grid.T
    return t[(t > lo + tol) & (t < hi - tol)]


def frac_deriv_left(f: SampledPath, a: float, alpha: float, t: float) -> np.ndarray:
    """``D^alpha_{a+} f(t)`` for the piecewise-linear interpolant of ``f``."""
    _check_unit_alpha(alpha)
    if not t > a:
        raise InvalidArgumentError(f"left derivative needs t > a, got t={t}, a={a}")
    if a < 0 or t > f.grid.T * (1 + _EDGE):
        raise InvalidArgumentError("a and t must lie in [0, T]")
    s = np.concatenate(([t], _interior_nodes(f, a, t)[::-1], [a]))
    u = t - s
    ft = f.interp(t)
    h = ft - f.interp(s)
    w = node_weights(u, -alpha - 1.0)
    integral = w @ h
    return (ft / (t - a) ** alpha + alpha * integral) / math.gamma(1.0 - alpha)


def frac_deriv_right(g: SampledPath, b: float, alpha: float, t: float) -> np.ndarray:
    """Real-valued ``D^alpha_{b-} g(t)`` (phase factor omitted).

    Apply it to ``g - g(b)`` to obtain the quantity used in integration by parts.
    """
    _check_unit_alpha(alpha)
    if not t < b:
        raise InvalidArgumentError(f"right derivative needs t < b, got t={t}, b={b}")
    if t < 0 or b > g.grid.T * (1 + _EDGE):
        raise InvalidArgumentError("t and b must lie in [0, T]")
    s = np.concatenate(([t], _interior_nodes(g, t, b), [b]))
    u = s - t
    gt = g.interp(t)
    h = gt - g.interp(s)
    w = node_weights(u, -alpha - 1.0)
    integral = w @ h
    return (gt / (b - t) ** alpha + alpha * integral) / math.gamma(1.0 - alpha)


def _segment(f, g, a, b):
    check_same_grid(f, g)
    grid = f.grid
    a = 0.0 if a is None else a
    b = grid.T if b is None else b
    ia, ib = grid.index_of(a), grid.index_of(b)
    if not ib > ia:
        raise InvalidArgumentError(f"interval [{a}, {b}] contains no grid cell")
    if f.dim != g.dim and f.dim != 1 and g.dim != 1:
        raise InvalidArgumentError(f"cannot pair dimensions {f.dim} and {g.dim}")
    return ia, ib


def rs_integral_sums(f: SampledPath, g: SampledPath, a=None, b=None) -> np.ndarray:
    """Left-point sum ``sum_k f(t_k) (g(t_{k+1}) - g(t_k))`` over nodes in ``[a, b]``.

    Integrals are componentwise; a one-dimensional ``f`` or ``g`` broadcasts.
    """
    ia, ib = _segment(f, g, a, b)
    fv = f.values[ia:ib]
    dg = np.diff(g.values[ia:ib + 1], axis=0)
    return (fv * dg).sum(axis=0)


def rs_integral_forpart(f: SampledPath, g: SampledPath, a=None, b=None,
                        alpha: float | None = None) -> np.ndarray:
    """``int_a^b f dg`` through fractional integration by parts.

    The outer integral is a composite midpoint rule over the grid cells in
    ``[a, b]``; both fractional derivatives are evaluated at cell midpoints
    with their singular integrals taken exactly against the piecewise-linear
    interpolants. The ``f(a) (t-a)**-alpha`` part of the left derivative is
    integrated exactly over each cell instead. ``alpha`` defaults to ``default_alpha(1.0)`` (smooth data).
    """
    ia, ib = _segment(f, g, a, b)
    if alpha is None:
        alpha = default_alpha(1.0)
    if not 0.0 < alpha < 0.5:
        raise InvalidArgumentError(f"alpha must lie in (0, 1/2), got {alpha}")
    dt = f.grid.dt
    m = ib - ia
    fv = np.ascontiguousarray(f.values[ia:ib + 1])
    gv = np.ascontiguousarray(g.values[ia:ib + 1])

    breaks = np.concatenate(([0.0], np.arange(m) + 0.5))
    mid = (np.arange(m) + 0.5) * dt

    p_left = -alpha - 1.0
    interior, end = running_weights(breaks, p_left)
    scale = dt ** (p_left + 1.0)
    left_int = _kernels.frac_left_mid(fv, interior * scale, end * scale)
    fmid = 0.5 * (fv[:-1] + fv[1:])
    d_left = (fmid / mid[:, None] ** alpha + alpha * left_int) / math.gamma(1.0 - alpha)

    beta = 1.0 - alpha
    p_right = -beta - 1.0
    interior, end = running_weights(breaks, p_right)
    scale = dt ** (p_right + 1.0)
    right_int = _kernels.frac_right_mid(gv, interior * scale, end * scale)
    gmid_b = 0.5 * (gv[:-1] + gv[1:]) - gv[-1]
    d_right = (gmid_b / mid[::-1, None] ** beta + beta * right_int) / math.gamma(1.0 - beta)

    # The term f(a) (t-a)^-alpha of the left derivative is integrated exactly on
    # each cell; the midpoint rule handles only the regular remainder.
    singular = fv[0] / math.gamma(1.0 - alpha)
    regular = d_left - singular * mid[:, None] ** (-alpha)
    k = np.arange(m + 1) * dt
    cell_mass = np.diff(k ** beta) / beta
    total = (regular * d_right).sum(axis=0) * dt + singular * (cell_mass @ d_right)
    return -total
