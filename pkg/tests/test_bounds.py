import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracvolterra.bounds import (BoundKind, BoundParams, b0_alpha, bound_report, calibrate_constant,
                                 eval_bound, eval_log_bound, scaling_experiment)
from fracvolterra.errors import InvalidArgumentError
from fracvolterra.families import build_family
from fracvolterra.fbm import sample_fbm
from fracvolterra.grid import TimeGrid


def test_b0_alpha_examples():
    grid = TimeGrid(1.0, 4096)
    assert b0_alpha(None, 0.3, 1.0, grid) == 0.0
    assert b0_alpha(lambda t, u: 0 * t, 0.3, 1.0, grid) == 0.0
    assert b0_alpha(lambda t, u: 1 + 0 * t, 0.3, 1.0, grid) == pytest.approx(1.0, rel=1e-12)
    g2 = TimeGrid(2.0, 256)
    assert b0_alpha(lambda t, u: 3 + 0 * t, 0.4, 2.0, g2) == pytest.approx(3 * 2 ** 0.4, rel=1e-12)
    assert b0_alpha(lambda t, u: u, 0.25, 1.0, grid) == pytest.approx(0.2 ** 0.25, abs=1e-3)


def test_b0_alpha_errors():
    grid = TimeGrid(1.0, 32)
    with pytest.raises(InvalidArgumentError), np.errstate(divide="ignore"):
        b0_alpha(lambda t, u: np.log(u), 0.3, 1.0, grid)
    with pytest.raises(InvalidArgumentError):
        b0_alpha(lambda t, u: t, 0.6, 1.0, grid)
    with pytest.raises(InvalidArgumentError):
        b0_alpha(lambda t, u: t, 0.3, 2.0, grid)


def test_eval_bound_examples():
    p = BoundParams(T=1.0, alpha=0.3, sigma_sup=1.0, C=1.0)
    assert eval_bound(BoundKind.BOUNDED_SIGMA, p, 0.0, 0.0) == 2.0
    assert eval_bound(BoundKind.GENERAL, p, 0.0, 0.0) == pytest.approx(math.e ** 2, rel=1e-15)


def test_log_bound_matches_and_survives_overflow():
    p = BoundParams(T=1.0, alpha=0.3, L=1.0, K=1.0, sigma_sup=1.0, h_sup=1.0, f_sup=1.0,
                    w_sup=1.0, C=1.0)
    for kind in BoundKind:
        v = eval_bound(kind, p, 0.5, 0.1)
        if math.isfinite(v):
            assert eval_log_bound(kind, p, 0.5, 0.1) == pytest.approx(math.log(v), rel=1e-12)
    assert eval_bound(BoundKind.LINEAR_SYSTEM, p, 0.0, 5.0) == math.inf
    assert math.isfinite(eval_log_bound(BoundKind.LINEAR_SYSTEM, p, 0.0, 5.0))


def test_linear_system_bound_needs_sups():
    with pytest.raises(InvalidArgumentError):
        eval_bound(BoundKind.LINEAR_SYSTEM, BoundParams(T=1.0, alpha=0.3, sigma_sup=1.0), 0.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        eval_bound(BoundKind.BOUNDED_SIGMA, BoundParams(T=1.0, alpha=0.3), 0.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        BoundParams(T=1.0, alpha=0.3, L=-1.0)


nonneg = st.floats(0, 3)


@settings(max_examples=60, deadline=None)
@given(field=st.sampled_from(["L", "L0", "K", "sigma_sup", "B0", "C"]), base=nonneg, bump=st.floats(0.01, 2),
       g=nonneg, x0=nonneg, kind=st.sampled_from([BoundKind.BOUNDED_SIGMA, BoundKind.GENERAL]))
def test_bound_monotone_in_every_input(field, base, bump, g, x0, kind):
    p = BoundParams(T=0.7, alpha=0.3, L=0.2, L0=0.1, K=0.5, sigma_sup=1.0, B0=0.3, C=0.4)
    p = replace(p, **{field: base})
    hi = replace(p, **{field: base + bump})
    assert eval_log_bound(kind, hi, x0, g) >= eval_log_bound(kind, p, x0, g)
    assert eval_log_bound(kind, p, x0 + bump, g) >= eval_log_bound(kind, p, x0, g)
    assert eval_log_bound(kind, p, x0, g + bump) >= eval_log_bound(kind, p, x0, g)


def test_bound_strictly_increasing_in_driver_norm():
    p = BoundParams(T=1.0, alpha=0.3, L=1.0, sigma_sup=1.0, C=0.5)
    vals = [eval_bound(BoundKind.BOUNDED_SIGMA, p, 0.0, g) for g in np.linspace(0, 5, 20)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("kind", list(BoundKind))
def test_bound_at_zero_driver_ignores_beta(kind):
    p = BoundParams(T=1.0, alpha=0.3, beta=0.4, L=0.3, sigma_sup=1.0, h_sup=0.1, f_sup=0.1, w_sup=1.0)
    q = replace(p, beta=1.0)
    a, b = eval_log_bound(kind, p, 1.0, 0.0), eval_log_bound(kind, q, 1.0, 0.0)
    assert math.isfinite(a) and a == b


def test_calibration_examples():
    p = BoundParams(T=1.0, alpha=0.3, L=0.2, sigma_sup=1.0)
    assert calibrate_constant(BoundKind.BOUNDED_SIGMA, p, [(0.5, 1.0, 0.0), (1.0, 2.0, 0.1)]) == 0.0
    target = eval_bound(BoundKind.BOUNDED_SIGMA, replace(p, C=1.0), 0.2, 1.7)
    C = calibrate_constant(BoundKind.BOUNDED_SIGMA, p, [(target, 1.7, 0.2)])
    assert C == pytest.approx(1.0, rel=1e-6)
    rep = bound_report(BoundKind.BOUNDED_SIGMA, p, [(target, 1.7, 0.2), (1.0, 0.3, 0.0)])
    assert rep.max_ratio <= 1.0 and rep.max_ratio == pytest.approx(1.0, rel=1e-5)


def test_calibration_rejects_empty():
    with pytest.raises(InvalidArgumentError):
        calibrate_constant(BoundKind.GENERAL, BoundParams(T=1.0, alpha=0.3), [])


def test_scaling_constant_sigma_slope_one():
    g = sample_fbm(TimeGrid(1.0, 256), 0.75, 1, seed=8)
    res = scaling_experiment(build_family("constant"), 0.0, g, [1, 2, 4, 8, 16])
    assert res.poly_slope == pytest.approx(1.0, abs=1e-12)
    assert not res.truncated


def test_scaling_bounded_sigma_polynomial():
    g = sample_fbm(TimeGrid(1.0, 512), 0.75, 1, seed=9)
    res = scaling_experiment(build_family("sinusoidal", cap=0.0), 0.5, g, [1, 2, 4, 8, 16, 32])
    assert res.poly_slope <= 1 / (1 - 0.3) + 0.2


def test_scaling_linear_prefers_exponential():
    # sup |x| = exp(lam max g): needs a driver that rises above its start
    g = sample_fbm(TimeGrid(1.0, 512), 0.75, 1, seed=11)
    assert g.values.max() > 0
    res = scaling_experiment(build_family("linear"), 1.0, g, [0.5, 1, 2, 4, 8])
    assert res.prefers_exponential
    assert res.exp_rss < 0.1 * res.poly_rss


def test_scaling_ladder_validation():
    g = sample_fbm(TimeGrid(1.0, 32), 0.75, 1, seed=1)
    with pytest.raises(InvalidArgumentError):
        scaling_experiment(build_family("constant"), 0.0, g, [1, 2, 3])
    with pytest.raises(InvalidArgumentError):
        scaling_experiment(build_family("constant"), 0.0, g, [1, 3, 2, 4])
