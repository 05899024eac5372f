"""Explicit sup-norm bounds for Volterra solutions and scaling experiments.

Three bound shapes are available:

* ``BOUNDED_SIGMA``: polynomial in the driver norm, needs ``sigma_sup``;
* ``GENERAL``: exponential, no boundedness of ``sigma``;
* ``LINEAR_SYSTEM``: exponential bound for the auxiliary linear system.

The generic constant ``C`` is always supplied by the caller. It can be
calibrated empirically with :func:`calibrate_constant`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import CalibrationFailureError, InvalidArgumentError, NumericOverflowError
from .grid import SampledPath, TimeGrid, sup_norm
from .volterra import CoefficientSet, solve_svie


class BoundKind(enum.Enum):
    BOUNDED_SIGMA = "bounded_sigma"
    GENERAL = "general"
    LINEAR_SYSTEM = "linear_system"


@dataclass(frozen=True)
class BoundParams:
    T: float
    alpha: float
    beta: float = 1.0
    L: float = 0.0
    L0: float = 0.0
    K: float = 0.0
    sigma_sup: Optional[float] = None
    h_sup: Optional[float] = None
    f_sup: Optional[float] = None
    w_sup: Optional[float] = None
    B0: float = 0.0
    C: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise InvalidArgumentError(f"T must be positive, got {self.T}")
        if not 0.0 < self.alpha < 0.5:
            raise InvalidArgumentError(f"alpha must lie in (0, 1/2), got {self.alpha}")
        for name in ("L", "L0", "K", "sigma_sup", "h_sup", "f_sup", "w_sup", "B0"):
            v = getattr(self, name)
            if v is not None and not v >= 0:
                raise InvalidArgumentError(f"{name} must be >= 0, got {v}")
        if not self.C >= 0:
            raise InvalidArgumentError(f"C must be >= 0, got {self.C}")

    @classmethod
    def from_coefficients(cls, coeffs: CoefficientSet, T: float, alpha: float, C: float = 1.0,
                          B0: float = 0.0) -> "BoundParams":
        c = coeffs.constants
        return cls(T=T, alpha=alpha, beta=c.beta, L=c.L, L0=c.L0, K=c.K, sigma_sup=c.sigma_sup,
                   h_sup=c.h_sup, f_sup=c.f_sup, w_sup=c.w_sup, B0=B0, C=C)


@dataclass(frozen=True)
class BoundReport:
    measured: np.ndarray
    rhs: np.ndarray
    calibrated_C: float

    @property
    def ratio(self) -> np.ndarray:
        return self.measured / self.rhs

    @property
    def max_ratio(self) -> float:
        return float(self.ratio.max())


def b0_alpha(b0, alpha: float, T: float, grid: TimeGrid) -> float:
    """``sup_t (int_0^t |b0(t,u)|^(1/alpha) du)^alpha`` with left-rectangle sums.

    ``b0(t, u)`` is vectorised over equal-shape arrays and returns either
    scalars or vectors (last axis) per pair; vectors enter via their norm.
    """
    if not 0.0 < alpha < 0.5:
        raise InvalidArgumentError(f"alpha must lie in (0, 1/2), got {alpha}")
    if b0 is None:
        return 0.0
    if abs(grid.T - T) > 1e-12 * T:
        raise InvalidArgumentError("grid horizon differs from T")
    t = grid.nodes
    tt, uu = np.meshgrid(t, t[:-1], indexing="ij")
    vals = np.asarray(b0(tt, uu), dtype=float)
    if vals.ndim == 3:
        vals = np.sqrt((vals ** 2).sum(axis=-1))
    if not np.all(np.isfinite(vals)):
        raise InvalidArgumentError("b0 produced non-finite values")
    p = np.abs(vals) ** (1.0 / alpha)
    # only u < t contributes
    p = np.tril(p, k=-1)
    inner = p.sum(axis=1) * grid.dt
    return float((inner ** alpha).max())


def _need(params, *names):
    missing = [nm for nm in names if getattr(params, nm) is None]
    if missing:
        raise InvalidArgumentError(f"bound needs {', '.join(missing)}")


def bound_constants(kind: BoundKind, p: BoundParams) -> tuple[float, float]:
    """The pair ``(K_a, K_b)`` multiplying ``1`` and ``||g||`` inside the exponent base."""
    T = p.T
    if kind is BoundKind.BOUNDED_SIGMA:
        _need(p, "sigma_sup")
        return 4.0 * (p.L * max(T, 1.0) + p.L0 + p.B0), p.C * (T + 1.0 + p.sigma_sup)
    if kind is BoundKind.GENERAL:
        return 6.0 * (p.L0 + p.L * (T + 1.0) + p.B0), p.C * (T + 1.0)
    _need(p, "sigma_sup", "h_sup", "f_sup", "w_sup")
    grow = math.exp(T) * (T + 1.0)
    k5 = 16.0 * (p.K + p.h_sup + p.L + p.L0 + p.B0) * grow
    k6 = p.C * (p.f_sup + p.sigma_sup + 1.0) * grow
    return k5, k6


def eval_bound(kind: BoundKind, params: BoundParams, x0_norm: float, g_norm: float) -> float:
    """Right-hand side of the sup-norm bound for ``kind``.

    ``g_norm`` is the Hölder norm of order ``1 - alpha`` of the driver.
    """
    kind = BoundKind(kind)
    if x0_norm < 0 or g_norm < 0:
        raise InvalidArgumentError("norms must be non-negative")
    ka, kb = bound_constants(kind, params)
    T = params.T
    inner = max((ka + kb * g_norm) ** (1.0 / (1.0 - params.alpha)), 1.0, T)
    with np.errstate(over="ignore"):
        if kind is BoundKind.BOUNDED_SIGMA:
            return x0_norm + 1.0 + T * inner
        if kind is BoundKind.GENERAL:
            return float((x0_norm + 1.0) * np.exp(2.0 * T * inner))
        return float(2.0 * (1.0 + params.w_sup) * np.exp(T * inner))


def eval_log_bound(kind: BoundKind, params: BoundParams, x0_norm: float, g_norm: float) -> float:
    """Natural log of :func:`eval_bound`, finite where the bound itself overflows."""
    kind = BoundKind(kind)
    if x0_norm < 0 or g_norm < 0:
        raise InvalidArgumentError("norms must be non-negative")
    ka, kb = bound_constants(kind, params)
    T = params.T
    inner = max((ka + kb * g_norm) ** (1.0 / (1.0 - params.alpha)), 1.0, T)
    if kind is BoundKind.BOUNDED_SIGMA:
        return math.log(x0_norm + 1.0 + T * inner)
    if kind is BoundKind.GENERAL:
        return math.log(x0_norm + 1.0) + 2.0 * T * inner
    return math.log(2.0 * (1.0 + params.w_sup)) + T * inner


def calibrate_constant(kind: BoundKind, fixed: BoundParams, ensemble, rtol: float = 1e-6) -> float:
    """Smallest ``C >= 0`` for which the bound dominates every ensemble member.

    ``ensemble`` holds ``(measured sup norm, driver norm, |x0|)`` triples.
    Bisection on ``C``; the bound is non-decreasing in ``C``.
    """
    kind = BoundKind(kind)
    pts = [tuple(map(float, e)) for e in ensemble]
    if not pts:
        raise InvalidArgumentError("calibration needs a non-empty ensemble")

    def dominated(C):
        p = replace(fixed, C=C)
        return all(eval_bound(kind, p, x0, g) >= meas for meas, g, x0 in pts)

    if dominated(0.0):
        return 0.0
    hi = 1.0
    while not dominated(hi):
        hi *= 2.0
        if hi > 1e300:
            raise CalibrationFailureError("bound cannot dominate the ensemble for any C")
    lo = 0.0 if hi == 1.0 else hi / 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if dominated(mid):
            hi = mid
        else:
            lo = mid
    return hi


def bound_report(kind: BoundKind, fixed: BoundParams, ensemble) -> BoundReport:
    """Calibrate ``C`` and tabulate measured vs bound per ensemble member."""
    C = calibrate_constant(kind, fixed, ensemble)
    p = replace(fixed, C=C)
    meas = np.array([e[0] for e in ensemble], dtype=float)
    rhs = np.array([eval_bound(kind, p, e[2], e[1]) for e in ensemble])
    return BoundReport(measured=meas, rhs=rhs, calibrated_C=C)


@dataclass(frozen=True)
class ScalingResult:
    lambdas: np.ndarray
    sup_norms: np.ndarray
    poly_slope: float
    loglog_slope: float
    poly_rss: float
    exp_rss: float
    truncated: bool

    @property
    def prefers_exponential(self) -> bool:
        return self.exp_rss < self.poly_rss


def _fit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(resid @ resid)


def scaling_experiment(coeffs: CoefficientSet, x0, base_g: SampledPath, lambdas,
                       grid: TimeGrid | None = None) -> ScalingResult:
    """Solve with drivers ``lam * base_g`` and fit growth shapes.

    * ``poly_slope``: slope of ``log ||x||`` against ``log lam``.
    * ``loglog_slope``: slope of ``log log(||x|| / (|x0| + 1) + e)`` against ``log lam``.
    * ``poly_rss`` / ``exp_rss``: residuals of ``log ||x||`` fitted linearly
      in ``log lam`` (polynomial growth) and in ``lam`` (exponential growth).

    If the solver overflows the ladder is cut at the last finite point and
    ``truncated`` is set.
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size < 4 or np.any(np.diff(lam) <= 0) or lam[0] <= 0:
        raise InvalidArgumentError("need an increasing ladder of at least 4 positive values")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    x0n = float(np.linalg.norm(x0))
    norms = []
    truncated = False
    for la in lam:
        try:
            x = solve_svie(coeffs, x0, base_g.scaled(la), grid)
        except (NumericOverflowError, InvalidArgumentError):
            truncated = True
            break
        norms.append(sup_norm(x))
    if len(norms) < 3:
        raise NumericOverflowError("scaling ladder overflowed before three points", index=len(norms))
    lam = lam[:len(norms)]
    norms = np.asarray(norms)
    ll = np.log(lam)
    ly = np.log(norms)
    poly_slope, poly_rss = _fit(ll, ly)
    _, exp_rss = _fit(lam, ly)
    loglog_slope, _ = _fit(ll, np.log(np.log(norms / (x0n + 1.0) + math.e)))
    return ScalingResult(lam, norms, poly_slope, loglog_slope, poly_rss, exp_rss, truncated)
