"""Malliavin derivative of the solution, its Gram matrix, nondegeneracy
diagnostics and Monte Carlo density estimates.

The Malliavin derivative ``D_s X_t`` is the sensitivity field of the solver
evaluated with the fBm path as driver, so :func:`malliavin_field` reuses
:func:`fracvolterra.volterra.solve_sensitivity_field`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import DegenerateInputError, InvalidArgumentError
from .fbm import cell_covariances
from .grid import SampledPath, TimeGrid, sup_norm
from .volterra import (CoefficientSet, SensitivityField, _unpack_probes, frechet_direction,
                       solve_sensitivity_field, solve_svie)

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10


def malliavin_field(coeffs: CoefficientSet, X: SampledPath, W: SampledPath,
                    grid: TimeGrid | None = None) -> SensitivityField:
    """``D_s X_t`` on all node pairs; zero for ``s > t``."""
    return solve_sensitivity_field(coeffs, X, W, grid)


@dataclass(frozen=True)
class MalliavinMatrix:
    t: float
    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise InvalidArgumentError(f"Malliavin matrix must be square, got {g.shape}")
        scale = max(1.0, float(np.abs(g).max(initial=0.0)))
        if np.abs(g - g.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise InvalidArgumentError("Malliavin matrix is not symmetric")
        object.__setattr__(self, "gamma", g)


def malliavin_matrix(D: SensitivityField, k: int, H: float) -> MalliavinMatrix:
    """``Gamma^{ij} = sum_l <D X^{i}_{t_k}, D X^{j}_{t_k}>_H`` restricted to ``[0, t_k]``.

    ``s -> D_s X_{t_k}`` is taken piecewise constant with the right node value
    on each cell, matching :func:`fracvolterra.fbm.h_inner_product`.
    """
    grid = D.grid
    if int(k) != k or not 0 <= k <= grid.n:
        raise InvalidArgumentError(f"node index {k} outside the grid 0..{grid.n}")
    k = int(k)
    d, m = D.d, D.m
    if k == 0:
        return MalliavinMatrix(0.0, np.zeros((d, d)))
    cells = np.ascontiguousarray(D.phi[k, 1:k + 1].reshape(k, d * m))
    omega = np.ascontiguousarray(cell_covariances(k, grid.dt, H))
    weighted = _kernels.toeplitz_apply(cells, omega).reshape(k, d, m)
    gamma = np.einsum("ail,ajl->ij", cells.reshape(k, d, m), weighted)
    gamma = 0.5 * (gamma + gamma.T)
    return MalliavinMatrix(float(grid.nodes[k]), gamma)


def gamma_spectrum(gamma: MalliavinMatrix | np.ndarray) -> tuple[float, float]:
    """``(smallest eigenvalue, determinant)``; the determinant is the eigenvalue product."""
    if not isinstance(gamma, MalliavinMatrix):
        gamma = MalliavinMatrix(float("nan"), gamma)
    eig = np.linalg.eigvalsh(gamma.gamma)
    return float(eig[0]), float(np.prod(eig))


@dataclass(frozen=True)
class EllipticityResult:
    passed: bool
    rho: float
    worst_probe: int
    worst_direction: np.ndarray
    worst_value: float


def ellipticity_check(sigma, probes, rho: float, d: int) -> EllipticityResult:
    """Check ``|sigma(t,s,x)^T xi|^2 >= rho^2`` for every unit ``xi`` and probe.

    The minimum over the unit sphere is the smallest eigenvalue of
    ``sigma sigma^T``, attained at its eigenvector, so it is computed exactly
    rather than searched over a mesh of directions.
    """
    if not rho > 0:
        raise InvalidArgumentError(f"rho must be positive, got {rho}")
    if len(probes) == 0:
        raise InvalidArgumentError("need at least one probe")
    t, s, x = _unpack_probes(probes, d)
    sig = sigma(t, s, x)
    eig, vec = np.linalg.eigh(sig @ np.swapaxes(sig, 1, 2))
    worst = int(np.argmin(eig[:, 0]))
    xi = vec[worst, :, 0]
    xi = xi * np.sign(xi[np.flatnonzero(np.abs(xi) > 1e-12)[0]])
    value = float(max(eig[worst, 0], 0.0))
    return EllipticityResult(value >= rho ** 2 * (1 - 1e-12), rho, worst, xi, value)


@dataclass(frozen=True)
class GradientCheckReport:
    eps: np.ndarray
    gaps: np.ndarray
    slope: float
    exact: bool

    @property
    def passed(self) -> bool:
        return self.exact or 0.8 <= self.slope <= 1.2


def fd_gradient_check(coeffs: CoefficientSet, x0, W: SampledPath, h: SampledPath,
                      eps_ladder=(1e-2, 1e-3, 1e-4)) -> GradientCheckReport:
    """Compare ``(X(W + eps h) - X(W)) / eps`` with the directional derivative
    built from the sensitivity field, at each ``eps``.

    ``gaps`` are sup-node distances; ``slope`` is their log-log slope in
    ``eps``. When every gap sits at rounding level (the solution map is
    affine in the driver) ``exact`` is set and the slope is not meaningful.
    """
    eps = np.asarray(eps_ladder, dtype=float)
    if eps.size < 2 or np.any(eps <= 0):
        raise InvalidArgumentError("need at least two positive step sizes")
    x = solve_svie(coeffs, x0, W)
    field_ = malliavin_field(coeffs, x, W)
    deriv = frechet_direction(field_, h).values
    gaps = np.empty(eps.size)
    for i, e in enumerate(eps):
        xe = solve_svie(coeffs, x0, W + h.scaled(e))
        gaps[i] = np.abs((xe.values - x.values) / e - deriv).max()
    scale = max(1.0, float(np.abs(deriv).max()), sup_norm(x))
    floor = 1e-8 * scale
    exact = bool(np.all(gaps <= floor))
    if exact or np.any(gaps <= 0):
        slope = float("nan")
    else:
        slope = float(np.polyfit(np.log(eps), np.log(gaps), 1)[0])
    return GradientCheckReport(eps, gaps, slope, exact)


@dataclass(frozen=True)
class RegularityEstimate:
    t_exponent: float
    s_exponent: float
    lags: np.ndarray
    t_moduli: np.ndarray
    s_moduli: np.ndarray


def field_regularity(D: SensitivityField, lags=None) -> RegularityEstimate:
    """Fitted Hölder exponents of ``Phi_t(s)`` in ``t`` and in ``s``.

    For each lag the modulus is the largest change over node pairs with both
    points inside the region ``s <= t``; exponents are log-log slopes of
    modulus against lag length.
    """
    n = D.grid.n
    if lags is None:
        lags = 2 ** np.arange(0, max(int(np.log2(n)) - 3, 2))
    lags = np.asarray(lags, dtype=int)
    vec = D.phi.reshape(n + 1, n + 1, -1)
    tmod, smod = [], []
    for lag in lags:
        dt_ = np.sqrt(((vec[lag:] - vec[:-lag]) ** 2).sum(axis=-1))
        tmod.append(np.tril(dt_, k=0).max())
        ds_ = np.sqrt(((vec[:, lag:] - vec[:, :-lag]) ** 2).sum(axis=-1))
        smod.append(np.tril(ds_, k=-lag).max())
    ll = np.log(lags * D.grid.dt)
    tmod, smod = np.asarray(tmod), np.asarray(smod)
    t_exp = float(np.polyfit(ll, np.log(tmod), 1)[0]) if np.all(tmod > 0) else float("inf")
    s_exp = float(np.polyfit(ll, np.log(smod), 1)[0]) if np.all(smod > 0) else float("inf")
    return RegularityEstimate(t_exp, s_exp, lags, tmod, smod)


@dataclass(frozen=True)
class DensityEstimate:
    points: np.ndarray
    values: np.ndarray
    bandwidth: np.ndarray
    n_samples: int
    cell_volume: Optional[float] = None

    def mass(self) -> float:
        """Lattice sum times cell volume (needs a regular lattice)."""
        if self.cell_volume is None:
            raise InvalidArgumentError("mass needs points from a regular lattice")
        return float(self.values.sum() * self.cell_volume)


def scott_bandwidth(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    N, d = samples.shape
    return samples.std(axis=0, ddof=1) * N ** (-1.0 / (d + 4))


def density_lattice(samples, half_width: float = 5.0, num: int = 201):
    """Regular lattice covering ``mean +- half_width * std`` on each axis.

    Returns ``(points, cell_volume)``.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    mu, sd = samples.mean(axis=0), samples.std(axis=0, ddof=1)
    axes = [np.linspace(m - half_width * s, m + half_width * s, num) for m, s in zip(mu, sd)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in mesh], axis=1)
    vol = float(np.prod([a[1] - a[0] for a in axes]))
    return points, vol


def kde_density(samples, points, bandwidth=None, cell_volume: float | None = None,
                chunk: int = 4096) -> DensityEstimate:
    """Product-Gaussian kernel density estimate at ``points``.

    ``bandwidth`` defaults to Scott's rule per axis; a scalar is used on all axes.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    N, d = samples.shape
    if N < 100:
        raise InvalidArgumentError(f"density estimate needs at least 100 samples, got {N}")
    sd = samples.std(axis=0, ddof=1)
    if np.any(sd <= 1e-14 * np.maximum(1.0, np.abs(samples).max(axis=0))):
        raise DegenerateInputError("samples have zero variance along some axis")
    if bandwidth is None:
        bw = scott_bandwidth(samples)
    else:
        bw = np.broadcast_to(np.asarray(bandwidth, dtype=float), (d,)).copy()
        if np.any(bw <= 0):
            raise InvalidArgumentError("bandwidth must be positive")
    points = np.asarray(points, dtype=float).reshape(-1, d)
    norm = N * np.prod(bw) * (2 * np.pi) ** (d / 2)
    values = np.empty(len(points))
    for lo in range(0, len(points), chunk):
        u = (points[lo:lo + chunk, None, :] - samples[None, :, :]) / bw
        values[lo:lo + chunk] = np.exp(-0.5 * (u ** 2).sum(axis=-1)).sum(axis=1) / norm
    return DensityEstimate(points, values, bw, N, cell_volume)


def sup_moments(sup_values, powers=(2, 4), exp_rate: float = 0.1) -> dict:
    """Monte Carlo estimates of ``E sup|X|^p`` and ``E exp(exp_rate sup|X|)``."""
    v = np.asarray(sup_values, dtype=float)
    if v.size == 0:
        raise InvalidArgumentError("no samples")
    out = {f"p{p}": float(np.mean(v ** p)) for p in powers}
    out["exp"] = float(np.mean(np.exp(exp_rate * v)))
    return out
