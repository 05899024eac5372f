"""Built-in coefficient families with known hypothesis constants.

Matrix norms are Frobenius norms. Every family provides the first
derivatives in ``x`` needed by the sensitivity solver. Bounded drifts are
certified through ``b0`` (``|b| <= L0 |x| + b0(t, s)``), so the same
constants serve the bounded and the growing forms of the drift bound.
``h_sup`` and ``f_sup`` bound the drift and diffusion derivatives, which
form the default linear system.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidArgumentError
from .volterra import CoefficientSet, HypothesisConstants, SeparableForm


def _ones(t):
    return np.ones(np.shape(t))


def _zeros(shape):
    def ev(t, s, x):
        return np.zeros((len(t),) + shape)
    return ev


def _const_b0(c):
    def b0(t, s):
        return np.full(np.shape(t), float(c))
    return b0


def _smooth_clip_drift(d, cap, kappa):
    """``b^i = cap tanh(-kappa x_i / cap)``: mean reverting, ``|b^i| <= cap``."""
    if cap <= 0 or kappa == 0:
        return _zeros((d,)), _zeros((d, d))

    def b(t, s, x):
        return cap * np.tanh(-kappa * x / cap)

    def db(t, s, x):
        sech2 = 1.0 / np.cosh(kappa * x / cap) ** 2
        out = np.zeros((x.shape[0], d, d))
        idx = np.arange(d)
        out[:, idx, idx] = -kappa * sech2
        return out

    return b, db


def constant(d=1, m=1, value=1.0, drift=0.0, T=1.0):
    """``sigma = value * eye(d, m)``, ``b = drift`` (every component)."""
    mat = value * np.eye(d, m)

    def sigma(t, s, x):
        return np.broadcast_to(mat, (len(t), d, m)).copy()

    def b(t, s, x):
        return np.full((len(t), d), float(drift))

    sep = SeparableForm(_ones, lambda s, x: b(s, s, x), _ones, lambda s, x: sigma(s, s, x))
    consts = HypothesisConstants(K=0.0, L=0.0, L0=0.0, sigma_sup=float(np.linalg.norm(mat)),
                                 rho=abs(value) if d <= m and value != 0 else None,
                                 h_sup=0.0, f_sup=0.0)
    return CoefficientSet(b=b, sigma=sigma, d=d, m=m, db_dx=_zeros((d, d)),
                          dsigma_dx=_zeros((d, m, d)), constants=consts, separable=sep,
                          b0=_const_b0(abs(drift) * math.sqrt(d)) if drift else None,
                          name="constant")


def sinusoidal(d=1, m=1, amplitude=1.0, omega=1.0, nu=1.0, cap=1.0, kappa=1.0, T=1.0):
    """``sigma^{ij} = A sin(x_i + omega t + nu s + j)`` with the tanh drift."""
    phase = np.arange(m, dtype=float)
    A = float(amplitude)

    def arg(t, s, x):
        return x[:, :, None] + (omega * t + nu * s)[:, None, None] + phase[None, None, :]

    def sigma(t, s, x):
        return A * np.sin(arg(t, s, x))

    def dsigma(t, s, x):
        out = np.zeros((len(t), d, m, d))
        c = A * np.cos(arg(t, s, x))
        idx = np.arange(d)
        out[:, idx, :, idx] = np.moveaxis(c, 1, 0)
        return out

    b, db = _smooth_clip_drift(d, cap, kappa)
    live = cap > 0 and kappa != 0
    consts = HypothesisConstants(K=abs(A) * math.sqrt(m) * (1 + abs(omega)), L=0.0, L0=0.0,
                                 sigma_sup=abs(A) * math.sqrt(d * m),
                                 h_sup=abs(kappa) * math.sqrt(d) if live else 0.0,
                                 f_sup=abs(A) * math.sqrt(d * m))
    return CoefficientSet(b=b, sigma=sigma, d=d, m=m, db_dx=db, dsigma_dx=dsigma,
                          constants=consts, b0=_const_b0(cap * math.sqrt(d)) if live else None,
                          name="sinusoidal")


def linear(d=1, m=None, scale=1.0, drift=0.0, T=1.0):
    """``sigma^{ij} = scale x_i delta_ij`` (unbounded), ``b = drift x``."""
    m = d if m is None else m

    def sigma(t, s, x):
        out = np.zeros((len(t), d, m))
        k = min(d, m)
        idx = np.arange(k)
        out[:, idx, idx] = scale * x[:, :k]
        return out

    def dsigma(t, s, x):
        out = np.zeros((len(t), d, m, d))
        for i in range(min(d, m)):
            out[:, i, i, i] = scale
        return out

    def b(t, s, x):
        return drift * x

    def db(t, s, x):
        return np.broadcast_to(drift * np.eye(d), (len(t), d, d)).copy()

    sep = SeparableForm(_ones, lambda s, x: b(s, s, x), _ones, lambda s, x: sigma(s, s, x))
    consts = HypothesisConstants(K=abs(scale), L=0.0, L0=abs(drift), sigma_sup=None,
                                 h_sup=abs(drift) * math.sqrt(d),
                                 f_sup=abs(scale) * math.sqrt(min(d, m)))
    return CoefficientSet(b=b, sigma=sigma, d=d, m=m, db_dx=db, dsigma_dx=dsigma,
                          constants=consts, separable=sep, name="linear")


def convolution(d=1, m=1, kappa=1.0, amplitude=1.0, omega=1.0, nu=1.0, T=1.0):
    """``b^i = (t - s) kappa sin(x_i)`` with the sinusoidal diffusion."""
    base = sinusoidal(d, m, amplitude, omega, nu, cap=0.0, T=T)

    def b(t, s, x):
        return (t - s)[:, None] * kappa * np.sin(x)

    def db(t, s, x):
        out = np.zeros((len(t), d, d))
        idx = np.arange(d)
        out[:, idx, idx] = (t - s)[:, None] * kappa * np.cos(x)
        return out

    def b0(t, s):
        return np.abs(t - s) * abs(kappa) * math.sqrt(d)

    consts = HypothesisConstants(K=base.constants.K, L=abs(kappa) * math.sqrt(d), L0=0.0,
                                 sigma_sup=base.constants.sigma_sup,
                                 h_sup=abs(kappa) * T * math.sqrt(d), f_sup=base.constants.f_sup)
    return CoefficientSet(b=b, sigma=base.sigma, d=d, m=m, db_dx=db,
                          dsigma_dx=base.dsigma_dx, constants=consts, b0=b0, name="convolution")


def elliptic(d=1, m=None, omega=1.0, nu=1.0, cap=1.0, kappa=1.0, T=1.0):
    """``sigma = (2 + sin(x_1 + omega t + nu s)) eye(d)``; uniformly elliptic with rho = 1."""
    m = d if m is None else m
    if m != d:
        raise InvalidArgumentError("elliptic family needs m == d")
    eye = np.eye(d)

    def arg(t, s, x):
        return x[:, 0] + omega * t + nu * s

    def sigma(t, s, x):
        return (2.0 + np.sin(arg(t, s, x)))[:, None, None] * eye

    def dsigma(t, s, x):
        out = np.zeros((len(t), d, m, d))
        out[:, :, :, 0] = np.cos(arg(t, s, x))[:, None, None] * eye
        return out

    b, db = _smooth_clip_drift(d, cap, kappa)
    live = cap > 0 and kappa != 0
    consts = HypothesisConstants(K=math.sqrt(d) * (1 + abs(omega)), L=0.0, L0=0.0,
                                 sigma_sup=3.0 * math.sqrt(d), rho=1.0,
                                 h_sup=abs(kappa) * math.sqrt(d) if live else 0.0,
                                 f_sup=math.sqrt(d))
    return CoefficientSet(b=b, sigma=sigma, d=d, m=m, db_dx=db, dsigma_dx=dsigma,
                          constants=consts, b0=_const_b0(cap * math.sqrt(d)) if live else None,
                          name="elliptic")


def rank_deficient(d=2, m=1, T=1.0):
    """Constant ``sigma`` whose columns miss the last ``d - m`` directions."""
    if d <= m:
        raise InvalidArgumentError("rank-deficient family needs d > m")
    fam = constant(d, m, 1.0, 0.0, T)
    return CoefficientSet(**{**fam.__dict__, "name": "rank_deficient"})


FAMILIES = {
    "constant": constant,
    "sinusoidal": sinusoidal,
    "linear": linear,
    "convolution": convolution,
    "elliptic": elliptic,
    "rank_deficient": rank_deficient,
}


def build_family(name: str, **params) -> CoefficientSet:
    try:
        builder = FAMILIES[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown coefficient family {name!r}; choose from {sorted(FAMILIES)}") from None
    return builder(**params)
