import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracvolterra.errors import InvalidArgumentError
from fracvolterra.families import FAMILIES, build_family
from fracvolterra.malliavin import ellipticity_check

CASES = [
    ("constant", dict(d=2, m=3, value=0.7, drift=0.4)),
    ("sinusoidal", dict(d=2, m=2, amplitude=1.5, omega=0.3, nu=-0.5, cap=0.8, kappa=2.0)),
    ("linear", dict(d=2, scale=1.3, drift=-0.4)),
    ("convolution", dict(d=2, m=1, kappa=0.9)),
    ("elliptic", dict(d=3)),
    ("rank_deficient", dict(d=3, m=1)),
]


def probes(d, count=200, seed=0):
    rng = np.random.default_rng(seed)
    t = rng.uniform(0, 1, count)
    s = t * rng.uniform(0, 1, count)
    return t, s, rng.normal(scale=2.0, size=(count, d))


@pytest.mark.parametrize("name,params", CASES)
def test_shapes(name, params):
    c = build_family(name, **params)
    t, s, x = probes(c.d)
    assert c.b(t, s, x).shape == (200, c.d)
    assert c.sigma(t, s, x).shape == (200, c.d, c.m)
    assert c.db_dx(t, s, x).shape == (200, c.d, c.d)
    assert c.dsigma_dx(t, s, x).shape == (200, c.d, c.m, c.d)
    assert c.name == name


@pytest.mark.parametrize("name,params", CASES)
def test_derivatives_match_central_differences(name, params):
    c = build_family(name, **params)
    t, s, x = probes(c.d, seed=1)
    eps = 1e-6
    for k in range(c.d):
        e = np.zeros(c.d)
        e[k] = eps
        fd_b = (c.b(t, s, x + e) - c.b(t, s, x - e)) / (2 * eps)
        fd_s = (c.sigma(t, s, x + e) - c.sigma(t, s, x - e)) / (2 * eps)
        assert np.allclose(c.db_dx(t, s, x)[:, :, k], fd_b, atol=1e-6)
        assert np.allclose(c.dsigma_dx(t, s, x)[..., k], fd_s, atol=1e-6)


@pytest.mark.parametrize("name,params", CASES)
def test_declared_constants_hold_on_probes(name, params):
    c = build_family(name, **params)
    k = c.constants
    t, s, x = probes(c.d, count=500, seed=2)
    assert c.verify_on_probes(list(zip(t, s, x))) == []
    _, _, y = probes(c.d, count=500, seed=3)
    dsig = np.sqrt(((c.sigma(t, s, x) - c.sigma(t, s, y)) ** 2).sum(axis=(1, 2)))
    assert np.all(dsig <= k.K * np.linalg.norm(x - y, axis=1) * (1 + 1e-12) + 1e-12)
    b = np.linalg.norm(c.b(t, s, x), axis=1)
    b0 = c.b0(t, s) if c.b0 is not None else 0.0
    assert np.all(b <= k.L0 * np.linalg.norm(x, axis=1) + b0 + 1e-12)
    if k.h_sup is not None:
        assert np.all(np.linalg.norm(c.db_dx(t, s, x), axis=(1, 2)) <= k.h_sup + 1e-12)
    if k.f_sup is not None:
        f = c.dsigma_dx(t, s, x).reshape(len(t), -1)
        assert np.all(np.linalg.norm(f, axis=1) <= k.f_sup + 1e-12)


@settings(max_examples=30, deadline=None)
@given(t=st.floats(0, 1), s=st.floats(0, 1), x=st.floats(-50, 50), A=st.floats(-3, 3))
def test_sinusoidal_bounded_everywhere(t, s, x, A):
    c = build_family("sinusoidal", d=2, m=3, amplitude=A)
    sig = c.sigma(np.array([t]), np.array([s]), np.array([[x, -x]]))
    assert np.linalg.norm(sig) <= c.constants.sigma_sup + 1e-12


def test_elliptic_family_is_uniformly_elliptic():
    c = build_family("elliptic", d=2)
    t, s, x = probes(2, count=300, seed=4)
    res = ellipticity_check(c.sigma, list(zip(t, s, x)), c.constants.rho, 2)
    assert res.passed


def test_bounded_flags():
    assert build_family("sinusoidal").constants.bounded_sigma
    assert not build_family("linear").constants.bounded_sigma
    assert build_family("constant", d=2, m=1).constants.rho is None


def test_registry_errors():
    assert set(FAMILIES) == {c[0] for c in CASES}
    with pytest.raises(InvalidArgumentError):
        build_family("cubic")
    with pytest.raises(InvalidArgumentError):
        build_family("elliptic", d=2, m=1)
    with pytest.raises(InvalidArgumentError):
        build_family("rank_deficient", d=1, m=1)
    with pytest.raises(TypeError):
        build_family("constant", amplitude=2.0)
