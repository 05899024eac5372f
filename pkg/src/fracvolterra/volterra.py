"""Pathwise two-time Euler solvers for Volterra equations driven by a
Hölder path ``g``.

Coefficient evaluators are vectorised over a leading sample axis: for arrays
``t``, ``s`` of shape ``(K,)`` and states ``x`` of shape ``(K, d)``

* ``b(t, s, x)``          -> ``(K, d)``
* ``sigma(t, s, x)``      -> ``(K, d, m)``
* ``db_dx(t, s, x)``      -> ``(K, d, d)``      ``[i, k] = d b^i / d x_k``
* ``dsigma_dx(t, s, x)``  -> ``(K, d, m, d)``   ``[i, l, k] = d sigma^{il} / d x_k``
* ``h(t, s, x)``          -> ``(K, d, d)``
* ``f(t, s, x)``          -> ``(K, d, d, m)``   ``[i, k, l]`` multiplies ``z^k dg^l``

Because the outer time ``t`` enters the integrands, node ``t_k`` depends on
every earlier node through ``b(t_k, t_j, x_j)``. The solvers sweep columns:
once ``x_j`` is known its contribution to every later node is added at once,
which costs one vectorised evaluation per node and O(n^2) arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InvalidArgumentError, NumericOverflowError
from .grid import SampledPath, TimeGrid, check_same_grid

Evaluator = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class HypothesisConstants:
    """Certified constants of the coefficient hypotheses.

    ``sigma_sup`` is ``None`` when the diffusion coefficient is unbounded.
    ``rho`` is the uniform-ellipticity constant, if one is known.
    """

    K: float = 0.0
    L: float = 0.0
    L0: float = 0.0
    sigma_sup: Optional[float] = None
    rho: Optional[float] = None
    beta: float = 1.0
    delta: float = 1.0
    mu: float = 1.0
    h_sup: Optional[float] = None
    f_sup: Optional[float] = None
    w_sup: Optional[float] = None

    @property
    def bounded_sigma(self) -> bool:
        return self.sigma_sup is not None


@dataclass(frozen=True)
class SeparableForm:
    """``b = phi_b(t) psi_b(s, x)`` and ``sigma = phi_sigma(t) psi_sigma(s, x)``.

    ``phi_*`` map a time array ``(K,)`` to scalars ``(K,)``; ``psi_*`` follow
    the evaluator conventions of ``b`` and ``sigma`` without the ``t`` argument.
    Declaring this lets :func:`solve_svie` run in O(n).
    """

    phi_b: Callable[[np.ndarray], np.ndarray]
    psi_b: Callable[[np.ndarray, np.ndarray], np.ndarray]
    phi_sigma: Callable[[np.ndarray], np.ndarray]
    psi_sigma: Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CoefficientSet:
    b: Evaluator
    sigma: Evaluator
    d: int
    m: int
    db_dx: Optional[Evaluator] = None
    dsigma_dx: Optional[Evaluator] = None
    h: Optional[Evaluator] = None
    f: Optional[Evaluator] = None
    w: Optional[SampledPath] = None
    b0: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    constants: HypothesisConstants = field(default_factory=HypothesisConstants)
    separable: Optional[SeparableForm] = None
    name: str = "custom"

    def with_linear_system(self, w: SampledPath, h: Evaluator | None = None,
                           f: Evaluator | None = None, h_sup=None, f_sup=None) -> "CoefficientSet":
        """Attach ``(h, f, w)``; by default the linearisation ``h = db/dx``,
        ``f = dsigma/dx`` of this set. Omitted sup bounds keep the declared ones."""
        if h is None:
            if self.db_dx is None:
                raise InvalidArgumentError("no drift derivative to use as h")
            h = self.db_dx
        if f is None:
            if self.dsigma_dx is None:
                raise InvalidArgumentError("no diffusion derivative to use as f")
            dsig = self.dsigma_dx
            def f(t, s, x):
                return np.swapaxes(dsig(t, s, x), 2, 3)
        w_sup = float(np.sqrt((w.values ** 2).sum(axis=1)).max())
        c = self.constants
        consts = replace(c, h_sup=c.h_sup if h_sup is None else h_sup,
                         f_sup=c.f_sup if f_sup is None else f_sup, w_sup=w_sup)
        return replace(self, h=h, f=f, w=w, constants=consts)

    def verify_on_probes(self, probes) -> list[str]:
        """Check the declared sup bound of ``sigma`` on ``(t, s, x)`` probes.

        Returns human-readable violations; an empty list means all probes pass.
        """
        problems = []
        if self.constants.sigma_sup is None:
            return problems
        t, s, x = _unpack_probes(probes, self.d)
        sig = self.sigma(t, s, x)
        norms = np.sqrt((sig ** 2).sum(axis=(1, 2)))
        bad = np.nonzero(norms > self.constants.sigma_sup * (1 + 1e-12))[0]
        for i in bad:
            problems.append(f"|sigma| = {norms[i]:.6g} exceeds {self.constants.sigma_sup:.6g} "
                            f"at probe {i}")
        return problems


def _unpack_probes(probes, d):
    t = np.array([p[0] for p in probes], dtype=float)
    s = np.array([p[1] for p in probes], dtype=float)
    x = np.array([np.broadcast_to(np.asarray(p[2], dtype=float), (d,)) for p in probes])
    return t, s, x


@dataclass(frozen=True)
class SensitivityField:
    """``phi[k, j]`` is the ``d x m`` matrix ``Phi_{t_k}(t_j)``; zero for ``j > k``."""

    grid: TimeGrid
    phi: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.phi.shape[2]

    @property
    def m(self) -> int:
        return self.phi.shape[3]

    def at(self, k: int) -> np.ndarray:
        """``s -> Phi_{t_k}(s)`` on all nodes, shape ``(n + 1, d, m)``."""
        return self.phi[k]


def _resolve_grid(g: SampledPath, grid: TimeGrid | None) -> TimeGrid:
    if grid is not None and grid != g.grid:
        raise InvalidArgumentError(f"driver lives on {g.grid}, not {grid}")
    return g.grid


def _check_driver(coeffs: CoefficientSet, g: SampledPath):
    if g.dim != coeffs.m:
        raise InvalidArgumentError(f"driver has {g.dim} components, coefficients expect m={coeffs.m}")


def _as_state(x0, d):
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.size == 1 and d > 1:
        x0 = np.full(d, x0[0])
    if x0.shape != (d,):
        raise InvalidArgumentError(f"initial state must have {d} components")
    return x0


def solve_svie(coeffs: CoefficientSet, x0, g: SampledPath, grid: TimeGrid | None = None,
               use_separable: bool = True) -> SampledPath:
    """Left-point Euler scheme for ``x_t = x0 + int b(t,s,x_s) ds + int sigma(t,s,x_s) dg_s``.

    ``x(t_k) = x0 + sum_{j<k} [b(t_k,t_j,x_j) dt + sigma(t_k,t_j,x_j)(g_{j+1}-g_j)]``.
    Raises :class:`NumericOverflowError` carrying the first non-finite node.
    """
    grid = _resolve_grid(g, grid)
    _check_driver(coeffs, g)
    d = coeffs.d
    x0 = _as_state(x0, d)
    if use_separable and coeffs.separable is not None:
        return _solve_separable(coeffs, x0, g)
    n, dt = grid.n, grid.dt
    t = grid.nodes
    dg = np.diff(g.values, axis=0)
    x = np.empty((n + 1, d))
    x[0] = x0
    acc = np.zeros((n + 1, d))
    for j in range(n):
        tk = t[j + 1:]
        cnt = tk.shape[0]
        s = np.full(cnt, t[j])
        xj = np.broadcast_to(x[j], (cnt, d))
        contrib = coeffs.b(tk, s, xj) * dt
        contrib += coeffs.sigma(tk, s, xj) @ dg[j]
        acc[j + 1:] += contrib
        x[j + 1] = x0 + acc[j + 1]
        if not np.all(np.isfinite(x[j + 1])):
            raise NumericOverflowError(f"non-finite state at node {j + 1}", index=j + 1)
    return SampledPath(grid, x)


def _solve_separable(coeffs, x0, g):
    sep = coeffs.separable
    grid = g.grid
    n, dt = grid.n, grid.dt
    t = grid.nodes
    dg = np.diff(g.values, axis=0)
    phi_b = np.asarray(sep.phi_b(t), dtype=float) * np.ones(n + 1)
    phi_s = np.asarray(sep.phi_sigma(t), dtype=float) * np.ones(n + 1)
    d = coeffs.d
    x = np.empty((n + 1, d))
    x[0] = x0
    drift = np.zeros(d)
    noise = np.zeros(d)
    for j in range(n):
        sj = t[j:j + 1]
        xj = x[j][None, :]
        drift += sep.psi_b(sj, xj)[0] * dt
        noise += sep.psi_sigma(sj, xj)[0] @ dg[j]
        x[j + 1] = x0 + phi_b[j + 1] * drift + phi_s[j + 1] * noise
        if not np.all(np.isfinite(x[j + 1])):
            raise NumericOverflowError(f"non-finite state at node {j + 1}", index=j + 1)
    return SampledPath(grid, x)


def solve_linear_z(coeffs: CoefficientSet, x: SampledPath, g: SampledPath,
                   grid: TimeGrid | None = None) -> SampledPath:
    """Solve ``z_t = w_t + int h(t,r,x_r) z_r dr + int f(t,r,x_r) z_r dg_r``
    with the same two-time scheme as :func:`solve_svie`."""
    grid = _resolve_grid(g, grid)
    check_same_grid(x, g)
    _check_driver(coeffs, g)
    if coeffs.h is None or coeffs.f is None or coeffs.w is None:
        raise InvalidArgumentError("linear system needs h, f and w in the coefficient set")
    check_same_grid(coeffs.w, g)
    d = coeffs.d
    if coeffs.w.dim != d or x.dim != d:
        raise InvalidArgumentError("w and x must have d components")
    n, dt = grid.n, grid.dt
    t = grid.nodes
    dg = np.diff(g.values, axis=0)
    w = coeffs.w.values
    z = np.empty((n + 1, d))
    acc = np.zeros((n + 1, d))
    z[0] = w[0]
    for j in range(n):
        tk = t[j + 1:]
        cnt = tk.shape[0]
        s = np.full(cnt, t[j])
        xj = np.broadcast_to(x.values[j], (cnt, d))
        mat = coeffs.h(tk, s, xj) * dt + coeffs.f(tk, s, xj) @ dg[j]
        acc[j + 1:] += mat @ z[j]
        z[j + 1] = w[j + 1] + acc[j + 1]
        if not np.all(np.isfinite(z[j + 1])):
            raise NumericOverflowError(f"non-finite value at node {j + 1}", index=j + 1)
    return SampledPath(grid, z)


def solve_sensitivity_field(coeffs: CoefficientSet, x: SampledPath, g: SampledPath,
                            grid: TimeGrid | None = None) -> SensitivityField:
    """Two-parameter field ``Phi_t(s)`` solving, for each ``s``,

        Phi_{t_k}(s) = sigma(t_k, s, x_s)
                       + sum_{s < t_u < t_k} [dsigma/dx(t_k,t_u,x_u) dg_u + db/dx(t_k,t_u,x_u) dt] Phi_{t_u}(s).

    The sum starts strictly after ``s``; with that convention the field is the
    exact derivative of the discrete solution map of :func:`solve_svie`. All
    ``s`` columns satisfy one block lower-triangular system, solved at once.
    """
    grid = _resolve_grid(g, grid)
    check_same_grid(x, g)
    _check_driver(coeffs, g)
    if coeffs.db_dx is None or coeffs.dsigma_dx is None:
        raise InvalidArgumentError("sensitivity field needs db_dx and dsigma_dx")
    d, m = coeffs.d, coeffs.m
    n, dt = grid.n, grid.dt
    t = grid.nodes
    dg = np.diff(g.values, axis=0)
    xv = x.values
    size = n + 1
    # system rows/cols are (node, component) pairs
    neg_a = np.zeros((size, d, size, d))
    rhs = np.zeros((size, d, size, m))
    diag = np.empty((size, d, m))
    for j in range(size):
        tk = t[j:]
        cnt = tk.shape[0]
        s = np.full(cnt, t[j])
        xj = np.broadcast_to(xv[j], (cnt, d))
        sig = coeffs.sigma(tk, s, xj)
        diag[j] = sig[0]
        if j == n:
            break
        rhs[j + 1:, :, j, :] = sig[1:]
        later, sl, xl = tk[1:], s[1:], xj[1:]
        block = coeffs.db_dx(later, sl, xl) * dt
        block += np.einsum("kilc,l->kic", coeffs.dsigma_dx(later, sl, xl), dg[j])
        neg_a[j + 1:, :, j, :] = -block
    strict = solve_triangular(neg_a.reshape(size * d, size * d), rhs.reshape(size * d, size * m),
                              lower=True, unit_diagonal=True, overwrite_b=True, check_finite=False)
    del neg_a
    phi = strict.reshape(size, d, size, m).transpose(0, 2, 1, 3).copy()
    idx = np.arange(size)
    phi[idx, idx] = diag
    bad = ~np.isfinite(phi)
    if np.any(bad):
        k, j = np.argwhere(bad)[0][:2]
        raise NumericOverflowError(f"non-finite sensitivity at (t, s) = ({k}, {j})", index=(int(k), int(j)))
    return SensitivityField(grid, phi)


def frechet_direction(field_: SensitivityField, h: SampledPath) -> SampledPath:
    """``D_h x_{t_k} = sum_{j<k} Phi_{t_k}(t_j) (h_{j+1} - h_j)``."""
    if h.grid != field_.grid:
        raise InvalidArgumentError("direction and field live on different grids")
    if h.dim != field_.m:
        raise InvalidArgumentError(f"direction needs {field_.m} components")
    n = field_.grid.n
    dh = np.diff(h.values, axis=0)
    strict = np.tril(np.ones((n + 1, n)), k=-1)
    out = np.einsum("ks,ksij,sj->ki", strict, field_.phi[:, :n], dh, optimize=True)
    return SampledPath(field_.grid, out)
