import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracvolterra.errors import InvalidArgumentError
from fracvolterra.grid import (NormKind, SampledPath, TimeGrid, holder_norm, holder_seminorm,
                               make_uniform_grid, path_norm, sup_norm, w_1malpha_2_norm,
                               w_alpha_1_norm)


def test_uniform_grid_nodes():
    assert np.array_equal(make_uniform_grid(1.0, 4).nodes, [0, 0.25, 0.5, 0.75, 1.0])
    assert np.array_equal(make_uniform_grid(2.0, 1).nodes, [0, 2.0])
    g = make_uniform_grid(3.0, 7)
    assert g.nodes[-1] == 3.0 and np.all(np.diff(g.nodes) > 0)


@pytest.mark.parametrize("T,n", [(0.0, 4), (-1.0, 4), (1.0, 0), (float("nan"), 4), (1.0, 2.5)])
def test_bad_grid_rejected(T, n):
    with pytest.raises(InvalidArgumentError):
        TimeGrid(T, n)


def test_path_validation():
    g = TimeGrid(1.0, 4)
    with pytest.raises(InvalidArgumentError):
        SampledPath(g, np.zeros(4))
    with pytest.raises(InvalidArgumentError):
        SampledPath(g, [0, 1, np.inf, 2, 3])
    p = SampledPath(g, np.arange(5.0))
    assert p.values.shape == (5, 1)
    with pytest.raises(ValueError):
        p.values[0, 0] = 3.0


def test_sup_norm_examples(make_path):
    assert sup_norm(make_path(1.0, 100, lambda t: np.full_like(t, 3.0))) == 3.0
    assert sup_norm(make_path(1.0, 100, lambda t: t)) == 1.0
    assert abs(sup_norm(make_path(1.0, 1024, lambda t: np.sin(2 * np.pi * t))) - 1) < 1e-4


def test_sup_norm_subinterval_and_errors(make_path):
    p = make_path(1.0, 100, lambda t: t)
    assert sup_norm(p, 0.0, 0.5) == pytest.approx(0.5)
    with pytest.raises(InvalidArgumentError):
        sup_norm(p, 0.6, 0.4)


def test_holder_examples(make_path):
    c = make_path(1.0, 64, lambda t: np.full_like(t, -2.5))
    assert holder_norm(c, 0.3) == 2.5
    assert holder_norm(make_path(1.0, 128, lambda t: t), 0.5) == pytest.approx(2.0)
    assert holder_norm(make_path(2.0, 128, lambda t: t), 0.5) == pytest.approx(2 + math.sqrt(2), abs=1e-5)


@pytest.mark.parametrize("lam", [0.0, -0.1, 1.5])
def test_holder_rejects_exponent(make_path, lam):
    with pytest.raises(InvalidArgumentError):
        holder_norm(make_path(1.0, 8, lambda t: t), lam)


def test_w_alpha_1_examples(make_path):
    lin = make_path(1.0, 256, lambda t: t)
    assert w_alpha_1_norm(make_path(1.0, 64, lambda t: np.full_like(t, 4.0)), 0.3) == 4.0
    assert w_alpha_1_norm(lin, 0.25) == pytest.approx(1 + 1 / 0.75, rel=1e-10)
    assert w_alpha_1_norm(lin, 0.4) == pytest.approx(1 + 1 / 0.6, rel=1e-10)


def test_w_1malpha_2_examples(make_path):
    assert w_1malpha_2_norm(make_path(1.0, 64, lambda t: np.full_like(t, 4.0)), 0.3) == 0.0
    assert w_1malpha_2_norm(make_path(1.0, 256, lambda t: t), 0.25) == pytest.approx(5.0, rel=1e-10)
    assert w_1malpha_2_norm(make_path(2.0, 256, lambda t: t), 0.25) == pytest.approx(2 ** 0.25 * 5, rel=1e-10)
    assert w_1malpha_2_norm(make_path(1.0, 256, lambda t: t), 0.4) == pytest.approx(3.5, rel=1e-10)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 0.7])
def test_sobolev_norms_reject_alpha(make_path, alpha):
    p = make_path(1.0, 16, lambda t: t)
    with pytest.raises(InvalidArgumentError):
        w_alpha_1_norm(p, alpha)
    with pytest.raises(InvalidArgumentError):
        w_1malpha_2_norm(p, alpha)


def test_path_norm_dispatch(make_path):
    p = make_path(1.0, 64, lambda t: t)
    assert path_norm(p, NormKind.SUP) == 1.0
    assert path_norm(p, NormKind.HOLDER, 0.5) == holder_norm(p, 0.5)
    assert path_norm(p, NormKind.W_ALPHA_1, 0.3) == w_alpha_1_norm(p, 0.3)
    assert path_norm(p, NormKind.W_1MALPHA_2, 0.3) == w_1malpha_2_norm(p, 0.3)
    with pytest.raises(InvalidArgumentError):
        path_norm(p, NormKind.HOLDER)


def test_holder_monotone_in_exponent_for_linear(make_path):
    p = make_path(1.0, 128, lambda t: t)
    quotients = [holder_seminorm(p, lam) for lam in (0.2, 0.4, 0.6, 0.8, 1.0)]
    assert all(a >= b for a, b in zip(quotients, quotients[1:]))


def test_inclusion_chain_on_smooth_paths(make_path):
    alpha = 0.3
    for f in (np.sin, np.exp, lambda t: t ** 2 - t):
        p = make_path(1.0, 256, f)
        assert holder_norm(p, 1 - alpha) <= w_1malpha_2_norm(p, alpha) + sup_norm(p) + 1e-12


def test_refinement_does_not_decrease_discrete_norms():
    f = lambda t: np.sin(7 * t) + t ** 0.8
    prev = None
    for n in (32, 64, 128, 256):
        p = SampledPath.from_function(TimeGrid(1.0, n), f)
        cur = (sup_norm(p), holder_seminorm(p, 0.7), w_1malpha_2_norm(p, 0.3))
        if prev is not None:
            assert cur[0] >= prev[0] - 1e-15 and cur[1] >= prev[1] - 1e-15
        prev = cur


paths = st.lists(st.floats(-50, 50, allow_nan=False), min_size=9, max_size=9)


@settings(max_examples=40, deadline=None)
@given(vals=paths, c=st.floats(-10, 10, allow_nan=False))
def test_norms_absolutely_homogeneous(vals, c):
    p = SampledPath(TimeGrid(1.0, 8), vals)
    q = p.scaled(c)
    for norm in (sup_norm, lambda x: holder_norm(x, 0.6), lambda x: w_alpha_1_norm(x, 0.3),
                 lambda x: w_1malpha_2_norm(x, 0.3)):
        assert norm(q) == pytest.approx(abs(c) * norm(p), rel=1e-9, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(vals=paths, shift=st.floats(-5, 5, allow_nan=False))
def test_seminorm_shift_invariant(vals, shift):
    p = SampledPath(TimeGrid(1.0, 8), vals)
    q = SampledPath(p.grid, p.values + shift)
    assert holder_seminorm(q, 0.5) == pytest.approx(holder_seminorm(p, 0.5), rel=1e-9, abs=1e-9)


def test_interp_matches_nodes(make_path):
    p = make_path(1.0, 10, lambda t: t ** 2)
    assert np.allclose(p.interp(p.grid.nodes)[:, 0], p.values[:, 0])
    assert p.interp(0.05)[0] == pytest.approx(0.5 * (0.0 + 0.01))


def test_grid_mismatch_rejected(make_path):
    with pytest.raises(InvalidArgumentError):
        make_path(1.0, 8, np.sin) + make_path(1.0, 16, np.sin)
