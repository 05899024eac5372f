import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from fracvolterra.errors import InvalidArgumentError
from fracvolterra.fbm import (GaussianSampler, c_hurst, covariance_rh, h_inner_product,
                              kernel_kh, kernel_kh_dt, kstar_apply, path_rng, sample_fbm)
from fracvolterra.grid import SampledPath, TimeGrid

# Kernel values pinned against scipy.integrate.quad of the defining integral
# (epsabs=epsrel=1e-12, singular weight handled by quad's 'alg' weight).
KH_ORACLE = {
    (1.0, 0.5, 0.75): 0.9375919636980568,
    (1.0, 0.01, 0.75): 1.900263656724149,
    (2.0, 1.0, 0.75): 1.1149910341991025,
    (0.3, 0.2, 0.75): 0.6152287696144979,
}


def _kh_quad(t, s, H):
    f = lambda u: u ** (H - 0.5)
    val = quad(f, s, t, weight="alg", wvar=(H - 1.5, 0.0), epsabs=1e-13, epsrel=1e-13)[0]
    return c_hurst(H) * s ** (0.5 - H) * val


def test_covariance_examples():
    assert covariance_rh(0.7, 0.7, 0.6) == pytest.approx(0.7 ** 1.2)
    assert covariance_rh(1.0, 2.0, 0.75) == pytest.approx(math.sqrt(2), rel=1e-14)
    assert covariance_rh(0.0, 0.4, 0.9) == 0.0


@pytest.mark.parametrize("H", [0.5, 1.0, 0.3, 1.2])
def test_hurst_out_of_range(H):
    with pytest.raises(InvalidArgumentError):
        covariance_rh(1.0, 1.0, H)


@settings(max_examples=50, deadline=None)
@given(t=st.floats(0, 5), s=st.floats(0, 5), H=st.floats(0.51, 0.99))
def test_covariance_symmetric(t, s, H):
    assert covariance_rh(t, s, H) == covariance_rh(s, t, H)


def test_c_hurst_finite_near_one():
    assert np.isfinite(c_hurst(0.999999))
    assert c_hurst(0.75) == pytest.approx(math.sqrt(0.75 * 0.5 / (math.gamma(0.5) * math.gamma(0.25)
                                                               / math.gamma(0.75))))


@pytest.mark.parametrize("key", sorted(KH_ORACLE))
def test_kernel_matches_pinned_oracle(key):
    assert kernel_kh(*key) == pytest.approx(KH_ORACLE[key], rel=1e-12)


def test_pinned_oracle_reproducible():
    assert _kh_quad(1.0, 0.5, 0.75) == pytest.approx(KH_ORACLE[(1.0, 0.5, 0.75)], rel=1e-10)


def test_kernel_zero_above_diagonal_and_singular_at_zero():
    assert kernel_kh(0.4, 0.5, 0.75) == 0.0
    assert kernel_kh(0.5, 0.5, 0.75) == 0.0
    with pytest.raises(InvalidArgumentError):
        kernel_kh(1.0, 0.0, 0.75)


def test_kernel_derivative():
    assert kernel_kh_dt(2.0, 1.0, 0.75) == pytest.approx(c_hurst(0.75) * 2 ** 0.25, rel=1e-14)
    # blows up like c_H (t-s)^(-3/4); c_H(0.75) ~ 0.267 so the value at 1e-8 is ~2.7e5
    near = kernel_kh_dt(1.0, 1.0 - 1e-8, 0.75)
    assert near * 1e-8 ** 0.75 == pytest.approx(c_hurst(0.75), rel=1e-7)
    assert kernel_kh_dt(1.0, 1.0 - 1e-10, 0.75) > 1e6
    with pytest.raises(InvalidArgumentError):
        kernel_kh_dt(1.0, 1.0, 0.75)
    s, t = 0.3, 0.9
    integral = quad(lambda u: kernel_kh_dt(u, s, 0.75), s, t, limit=200)[0]
    assert integral == pytest.approx(kernel_kh(t, s, 0.75), rel=1e-4)


def test_kernel_reproduces_covariance_on_diagonal():
    H = 0.75
    val = quad(lambda r: kernel_kh(1.0, r, H) ** 2, 0, 1, limit=200)[0]
    assert val == pytest.approx(1.0, rel=1e-3)


def test_sampler_factor_and_start():
    grid = TimeGrid(1.0, 32)
    smp = GaussianSampler(grid, 0.7)
    L = smp.cholesky_factor
    assert np.allclose(L @ L.T, smp.covariance, atol=1e-10)
    assert smp.jitter == 0.0
    p = smp.sample(path_rng(5), 3)
    assert p.values.shape == (33, 3) and np.all(p.values[0] == 0)


def test_covariance_matrix_psd():
    t = TimeGrid(1.0, 64).nodes[1:]
    for H in (0.55, 0.75, 0.95):
        assert np.linalg.eigvalsh(covariance_rh(t[:, None], t[None, :], H)).min() >= -1e-10


def test_sampling_is_deterministic():
    grid = TimeGrid(1.0, 64)
    a = sample_fbm(grid, 0.75, 2, seed=99)
    b = sample_fbm(grid, 0.75, 2, seed=99)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, sample_fbm(grid, 0.75, 2, seed=100).values)


def test_path_streams_are_distinct_and_stable():
    x = path_rng(1, 3).standard_normal(4)
    assert np.array_equal(x, path_rng(1, 3).standard_normal(4))
    assert not np.array_equal(x, path_rng(1, 4).standard_normal(4))


@pytest.mark.slow
def test_terminal_variance_and_increment_stationarity():
    grid = TimeGrid(1.0, 16)
    smp = GaussianSampler(grid, 0.75)
    N = 10_000
    paths = smp.sample_many(path_rng(2024), N)[:, :, 0]
    assert abs(paths[:, -1].var() - 1.0) <= 4 * math.sqrt(2 / N)
    inc = paths[:, 12] - paths[:, 4]
    target = (8 / 16) ** 1.5
    assert abs(np.mean(inc ** 2) - target) <= 4 * math.sqrt(2 / N) * target


def _indicator(grid, t):
    return SampledPath(grid, (grid.nodes <= t + 1e-12).astype(float))


def test_h_inner_product_examples():
    grid = TimeGrid(2.0, 512)
    zero = SampledPath(grid, np.zeros(513))
    assert h_inner_product(zero, zero, 0.75) == 0.0
    one = _indicator(grid, 1.0)
    assert h_inner_product(one, one, 0.75) == pytest.approx(1.0, abs=1e-12)
    two = _indicator(grid, 2.0)
    assert h_inner_product(one, two, 0.75) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_h_inner_product_rejects_mismatch():
    a = SampledPath(TimeGrid(1.0, 8), np.ones(9))
    with pytest.raises(InvalidArgumentError):
        h_inner_product(a, SampledPath(TimeGrid(1.0, 16), np.ones(17)), 0.75)


@settings(max_examples=30, deadline=None)
@given(vals=st.lists(st.floats(-10, 10, allow_nan=False), min_size=17, max_size=17),
       H=st.floats(0.55, 0.95))
def test_h_norm_nonnegative(vals, H):
    p = SampledPath(TimeGrid(1.0, 16), vals)
    assert h_inner_product(p, p, H) >= -1e-12


def test_kstar_maps_indicator_to_kernel():
    H = 0.75
    grid = TimeGrid(1.0, 1024)
    ind = _indicator(grid, 0.8)
    idx = np.array([100, 300, 500, 700])
    got = kstar_apply(ind, H, idx)[:, 0]
    want = kernel_kh(0.8, grid.nodes[idx], H)
    assert np.allclose(got, want, rtol=1e-2)
