"""Fractional Brownian motion: covariance, Volterra kernel, exact sampling and
the inner product of its reproducing Hilbert space."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError, NumericFailureError
from .grid import SampledPath, TimeGrid, check_same_grid

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
JITTER_LADDER = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)


def _check_hurst(H):
    if not 0.5 < H < 1.0:
        raise InvalidArgumentError(f"Hurst parameter must lie in (1/2, 1), got H={H}")


def covariance_rh(t, s, H):
    """``E[W_t W_s] = (t^2H + s^2H - |t-s|^2H) / 2``; broadcasts over arrays."""
    _check_hurst(H)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0) or np.any(s < 0):
        raise InvalidArgumentError("times must be non-negative")
    two_h = 2.0 * H
    out = 0.5 * (t ** two_h + s ** two_h - np.abs(t - s) ** two_h)
    return out if out.ndim else float(out)


def c_hurst(H):
    """Normalising constant of the kernel, via log-Gamma to stay finite near H=1."""
    _check_hurst(H)
    a, b = 2.0 - 2.0 * H, H - 0.5
    log_beta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    return math.sqrt(H * (2.0 * H - 1.0) * math.exp(-log_beta))


def kernel_kh(t, s, H):
    """Square-integrable Volterra kernel of fBm, zero for ``t <= s``.

    The endpoint singularity ``(u-s)**(H-3/2)`` is removed by substituting
    ``v = (u-s)**(H-1/2)``, which leaves
    ``(1/(H-1/2)) * int_0^{(t-s)**(H-1/2)} (s + v**(1/(H-1/2)))**(H-1/2) dv``;
    that bounded integrand is handled by 64-point Gauss-Legendre.
    """
    _check_hurst(H)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise InvalidArgumentError("kernel is singular at s = 0; need s > 0")
    t, s = np.broadcast_arrays(t, s)
    out = np.zeros(t.shape)
    live = t > s
    if np.any(live):
        tl, sl = t[live], s[live]
        hm = H - 0.5
        upper = (tl - sl) ** hm
        v = 0.5 * upper[:, None] * (_GL_NODES[None, :] + 1.0)
        integrand = (sl[:, None] + v ** (1.0 / hm)) ** hm
        integral = 0.5 * upper * (integrand @ _GL_WEIGHTS) / hm
        out[live] = c_hurst(H) * sl ** (-hm) * integral
    return out if out.ndim else float(out)


def kernel_kh_dt(t, s, H):
    """``d/dt K_H(t, s) = c_H (t/s)**(H-1/2) (t-s)**(H-3/2)`` for ``0 < s < t``."""
    _check_hurst(H)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0) or np.any(t <= s):
        raise InvalidArgumentError("need 0 < s < t for the kernel derivative")
    out = c_hurst(H) * (t / s) ** (H - 0.5) * (t - s) ** (H - 1.5)
    return out if out.ndim else float(out)


def kstar_apply(phi: SampledPath, H: float, s_index) -> np.ndarray:
    """Discrete ``(K*_H phi)(s) = int_s^T phi(t) dK_H(t,s)/dt dt`` at nodes ``s_index``.

    ``phi`` is taken piecewise constant (right node value on each cell). On each
    cell the smooth factor ``(u/s)**(H-1/2)`` is frozen at the midpoint and
    the singular factor is integrated exactly. Only used as a cross-check of
    the kernel.
    """
    _check_hurst(H)
    grid = phi.grid
    t = grid.nodes
    hm = H - 0.5
    idx = np.atleast_1d(np.asarray(s_index, dtype=int))
    if np.any(idx < 1) or np.any(idx >= grid.n):
        raise InvalidArgumentError("s must be an interior node with s > 0")
    out = np.zeros((idx.size, phi.dim))
    for r, j in enumerate(idx):
        s = t[j]
        lo, hi = t[j:-1], t[j + 1:]
        mid = 0.5 * (lo + hi)
        w = (mid / s) ** hm * ((hi - s) ** hm - (lo - s) ** hm) / hm
        out[r] = c_hurst(H) * (w @ phi.values[j + 1:])
    return out


def path_rng(seed: int, index: int | None = None) -> np.random.Generator:
    """Independent stream for path ``index`` derived from ``seed``.

    Uses ``SeedSequence`` spawn keys, so stream ``i`` is the same whether it
    is built alone or as part of a batch.
    """
    if index is None:
        return np.random.default_rng(np.random.SeedSequence(int(seed)))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


class GaussianSampler:
    """Exact sampler of ``m`` independent fBm components on a grid.

    The Cholesky factor of the covariance on the positive nodes is computed
    once; a small diagonal jitter is added only if the factorisation fails.
    """

    def __init__(self, grid: TimeGrid, H: float):
        _check_hurst(H)
        self.grid = grid
        self.H = float(H)
        t = grid.nodes[1:]
        cov = covariance_rh(t[:, None], t[None, :], H)
        self.jitter = None
        for eps in JITTER_LADDER:
            try:
                factor = np.linalg.cholesky(cov + eps * np.eye(len(t)))
            except np.linalg.LinAlgError:
                continue
            self.jitter = eps
            break
        else:
            raise NumericFailureError(
                f"Cholesky of fBm covariance failed even with jitter {JITTER_LADDER[-1]}")
        factor.flags.writeable = False
        self.cholesky_factor = factor
        self.covariance = cov

    def sample(self, rng: np.random.Generator, m: int = 1) -> SampledPath:
        if m < 1:
            raise InvalidArgumentError("need at least one fBm component")
        z = rng.standard_normal((self.grid.n, m))
        values = np.zeros((self.grid.n + 1, m))
        values[1:] = self.cholesky_factor @ z
        return SampledPath(self.grid, values)

    def sample_many(self, rng: np.random.Generator, count: int, m: int = 1) -> np.ndarray:
        """``count`` paths from one stream as an array ``(count, n+1, m)``."""
        z = rng.standard_normal((self.grid.n, m * count))
        out = np.zeros((count, self.grid.n + 1, m))
        out[:, 1:, :] = (self.cholesky_factor @ z).reshape(self.grid.n, count, m).transpose(1, 0, 2)
        return out


@lru_cache(maxsize=16)
def get_sampler(T: float, n: int, H: float) -> GaussianSampler:
    return GaussianSampler(TimeGrid(T, n), H)


def sample_fbm(grid: TimeGrid, H: float, m: int, seed: int) -> SampledPath:
    """Deterministic ``m``-dimensional fBm path on ``grid`` for ``seed``."""
    return get_sampler(grid.T, grid.n, float(H)).sample(path_rng(seed), m)


def cell_covariances(n: int, dt: float, H: float) -> np.ndarray:
    """``<1_cell_i, 1_cell_j>_H`` as a function of ``|i-j|`` (fGn autocovariance)."""
    _check_hurst(H)
    k = np.arange(n, dtype=float)
    two_h = 2.0 * H
    omega = 0.5 * ((k + 1) ** two_h - 2.0 * k ** two_h + np.abs(k - 1) ** two_h)
    return omega * dt ** two_h


def h_gram(left: np.ndarray, right: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """``left^T W right`` for the Toeplitz cell-weight matrix ``W``.

    ``left``/``right`` hold one row per grid cell (piecewise-constant values).
    """
    right = np.ascontiguousarray(right, dtype=float)
    return left.T @ _kernels.toeplitz_apply(right, np.ascontiguousarray(omega))


def h_inner_product(phi: SampledPath, psi: SampledPath, H: float) -> float:
    """``H(2H-1) sum_j int int phi^j(s) psi^j(r) |r-s|^(2H-2) ds dr``.

    Paths are read as piecewise constant, taking the right node value on each
    cell, so a sampled indicator ``1_[0,t_k]`` covers exactly ``[0, t_k)``;
    the weight is then integrated exactly cell by cell.
    """
    check_same_grid(phi, psi)
    if phi.dim != psi.dim:
        raise InvalidArgumentError(f"dimension mismatch: {phi.dim} vs {psi.dim}")
    grid = phi.grid
    omega = cell_covariances(grid.n, grid.dt, H)
    gram = h_gram(phi.values[1:], psi.values[1:], omega)
    return float(np.trace(gram))
