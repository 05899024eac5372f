"""Uniform time grids, sampled paths and discrete path norms.

All norms are evaluated on grid nodes only, so they are lower bounds for
the continuum quantities. Singular integrals inside the fractional Sobolev
norms are integrated exactly against the piecewise-linear interpolant of
the path (see :mod:`fracvolterra._quad`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from ._quad import running_weights
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition ``t_k = k T / n`` of ``[0, T]``."""

    T: float
    n: int

    def __post_init__(self):
        if not np.isfinite(self.T) or self.T <= 0:
            raise InvalidArgumentError(f"time horizon must be positive, got T={self.T}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgumentError(f"number of subintervals must be >= 1, got n={self.n}")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "n", int(self.n))

    @property
    def dt(self) -> float:
        return self.T / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        t = np.arange(self.n + 1) * self.dt
        t[-1] = self.T
        t.flags.writeable = False
        return t

    def index_of(self, t: float) -> int:
        """Nearest node index to ``t`` (clipped to the grid)."""
        k = int(np.rint(t / self.dt))
        return min(max(k, 0), self.n)


def make_uniform_grid(T: float, n: int) -> TimeGrid:
    return TimeGrid(T, n)


@dataclass(frozen=True)
class SampledPath:
    """Vector-valued path sampled on every node of ``grid``.

    ``values`` has shape ``(n + 1, dim)``; a 1-D array is promoted to a
    single column.
    """

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.grid.n + 1:
            raise InvalidArgumentError(
                f"path needs {self.grid.n + 1} rows, got array of shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("path values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_function(cls, grid: TimeGrid, func) -> "SampledPath":
        """Sample ``func`` (vectorised over time) at every node."""
        return cls(grid, func(grid.nodes))

    def __add__(self, other: "SampledPath") -> "SampledPath":
        check_same_grid(self, other)
        return SampledPath(self.grid, self.values + other.values)

    def scaled(self, c: float) -> "SampledPath":
        return SampledPath(self.grid, c * self.values)

    def interp(self, t) -> np.ndarray:
        """Piecewise-linear interpolant at times ``t`` (shape ``(..., dim)``)."""
        t = np.asarray(t, dtype=float)
        cols = [np.interp(t, self.grid.nodes, self.values[:, j]) for j in range(self.dim)]
        return np.stack(cols, axis=-1)


class NormKind(enum.Enum):
    W_ALPHA_1 = "w_alpha_1"
    W_1MALPHA_2 = "w_1malpha_2"
    HOLDER = "holder"
    SUP = "sup"


def check_same_grid(*paths: SampledPath) -> None:
    g0 = paths[0].grid
    for p in paths[1:]:
        if p.grid != g0:
            raise InvalidArgumentError(f"grid mismatch: {p.grid} vs {g0}")


def _node_range(path: SampledPath, a, b):
    grid = path.grid
    a = 0.0 if a is None else float(a)
    b = grid.T if b is None else float(b)
    if not (0.0 <= a < b <= grid.T * (1 + 1e-12)):
        raise InvalidArgumentError(f"need 0 <= a < b <= T, got a={a}, b={b}")
    ia, ib = grid.index_of(a), grid.index_of(b)
    if ia > ib:
        raise InvalidArgumentError(f"no grid nodes in [{a}, {b}]")
    return ia, ib


def _check_alpha(alpha):
    if not 0.0 < alpha < 0.5:
        raise InvalidArgumentError(f"alpha must lie in (0, 1/2), got {alpha}")


def sup_norm(path: SampledPath, a: float | None = None, b: float | None = None) -> float:
    ia, ib = _node_range(path, a, b)
    seg = path.values[ia:ib + 1]
    return float(np.sqrt((seg ** 2).sum(axis=1)).max())


def holder_seminorm(path: SampledPath, lam: float, a=None, b=None) -> float:
    """Largest difference quotient ``|f(t)-f(s)| / |t-s|**lam`` over node pairs."""
    if not 0.0 < lam <= 1.0:
        raise InvalidArgumentError(f"Hölder exponent must lie in (0, 1], got {lam}")
    ia, ib = _node_range(path, a, b)
    if ib - ia < 1:
        raise InvalidArgumentError("Hölder norm needs at least two nodes in [a, b]")
    seg = np.ascontiguousarray(path.values[ia:ib + 1])
    return float(_kernels.holder_sup(seg, path.grid.dt, float(lam)))


def holder_norm(path: SampledPath, lam: float, a=None, b=None) -> float:
    """Sup norm plus Hölder seminorm of order ``lam`` on ``[a, b]``."""
    semi = holder_seminorm(path, lam, a, b)
    return sup_norm(path, a, b) + semi


def _lag_weights(n, dt, p):
    interior, end = running_weights(np.arange(n + 1, dtype=float), p)
    scale = dt ** (p + 1.0)
    return interior * scale, end * scale


def w_alpha_1_profile(path: SampledPath, alpha: float) -> np.ndarray:
    """``|f(t)| + int_0^t |f(t)-f(s)| / (t-s)**(alpha+1) ds`` at every node."""
    _check_alpha(alpha)
    n, dt = path.grid.n, path.grid.dt
    interior, end = _lag_weights(n, dt, -alpha - 1.0)
    vals = np.ascontiguousarray(path.values)
    integral = _kernels.walpha1_integrals(vals, interior, end)
    return np.sqrt((vals ** 2).sum(axis=1)) + integral


def w_alpha_1_norm(path: SampledPath, alpha: float) -> float:
    return float(w_alpha_1_profile(path, alpha).max())


def w_1malpha_2_norm(path: SampledPath, alpha: float) -> float:
    """Sup over node pairs ``s < t`` of the Hölder quotient of order ``1-alpha``
    plus ``int_s^t |g(y)-g(s)| / (y-s)**(2-alpha) dy``."""
    _check_alpha(alpha)
    n, dt = path.grid.n, path.grid.dt
    interior, end = _lag_weights(n, dt, alpha - 2.0)
    qden = (np.arange(n + 1) * dt) ** (1.0 - alpha)
    qden[0] = np.inf
    vals = np.ascontiguousarray(path.values)
    return float(_kernels.w1malpha2_sup(vals, qden, interior, end))


def path_norm(path: SampledPath, kind: NormKind, param: float | None = None) -> float:
    """Dispatch on :class:`NormKind`; ``param`` is alpha or the Hölder exponent."""
    if kind is NormKind.SUP:
        return sup_norm(path)
    if param is None:
        raise InvalidArgumentError(f"{kind.value} norm needs a parameter")
    if kind is NormKind.HOLDER:
        return holder_norm(path, param)
    if kind is NormKind.W_ALPHA_1:
        return w_alpha_1_norm(path, param)
    return w_1malpha_2_norm(path, param)
