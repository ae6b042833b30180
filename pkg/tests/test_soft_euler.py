import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_mask
from hypertopo.errors import InvalidGridError, ShapeMismatchError
from hypertopo.grid_topology import euler_characteristic
from hypertopo.soft_euler import (LossWeights, loss_weight_schedule, soft_euler_char,
                                  soft_euler_grad, soft_euler_loss, topo_loss, tv_loss)
from oracles import central_difference, rel_err


def test_soft_euler_examples(ring):
    assert soft_euler_char(np.zeros((4, 5))) == 0.0
    assert soft_euler_char(ring.astype(float)) == 0.0
    # 4 * 0.5 - 2 * 0.25 - 2 * 0.25 + 0.0625
    assert soft_euler_char(np.full((2, 2), 0.5)) == 1.0625


def test_rejects_out_of_range():
    with pytest.raises(InvalidGridError):
        soft_euler_char([[0.5, 1.1]])
    # within the 1e-9 tolerance is accepted and clipped
    assert soft_euler_char([[1.0 + 1e-12]]) == 1.0


def test_binary_agreement_is_exact():
    rng = np.random.default_rng(5)
    for _ in range(200):
        m = random_mask(rng, 32)
        assert soft_euler_char(m.astype(float)) == euler_characteristic(m)


def test_grad_at_zero_is_one():
    np.testing.assert_array_equal(soft_euler_grad(np.zeros((4, 6))), 1.0)


def test_grad_single_pixel():
    for v in (0.0, 0.3, 1.0):
        assert soft_euler_grad([[v]])[0, 0] == 1.0


def test_grad_matches_finite_differences():
    rng = np.random.default_rng(9)
    for _ in range(20):
        shape = rng.integers(1, 33, size=2)
        p = rng.uniform(0.01, 0.99, size=shape)
        assert rel_err(soft_euler_grad(p), central_difference(soft_euler_char, p)) < 1e-6


def test_loss_examples():
    y = np.ones((2, 2), np.uint8)
    value, grad = soft_euler_loss(y.astype(float), y)
    assert value == 0.0
    assert not grad.any()
    value, _ = soft_euler_loss(np.full((2, 2), 0.5), y)
    assert value == pytest.approx(0.00390625, abs=1e-15)


def test_loss_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        soft_euler_loss(np.zeros((2, 2)), np.zeros((2, 3), np.uint8))


def test_loss_grad_matches_finite_differences():
    rng = np.random.default_rng(10)
    for _ in range(20):
        shape = rng.integers(1, 20, size=2)
        p = rng.uniform(0.01, 0.99, size=shape)
        y = (rng.random(shape) < 0.5).astype(np.uint8)
        value, grad = soft_euler_loss(p, y)
        assert value >= 0
        numeric = central_difference(lambda q: soft_euler_loss(q, y)[0], p)
        assert rel_err(grad, numeric) < 1e-6


def test_tv_examples():
    assert tv_loss(np.full((5, 4), 0.37))[0] == 0.0
    value, _ = tv_loss([[0.0, 1.0]], 1e-3)
    assert value == pytest.approx(math.sqrt(1 + 1e-6) - 1e-3, abs=1e-12)
    assert value == pytest.approx(0.9990005, abs=1e-7)


def test_tv_rejects_bad_eps():
    with pytest.raises(ValueError):
        tv_loss(np.zeros((2, 2)), 0.0)


@pytest.mark.parametrize("eps", [1e-2, 5e-2, 0.2])
def test_tv_grad_matches_finite_differences(eps):
    rng = np.random.default_rng(int(eps * 1000))
    for _ in range(20):
        shape = rng.integers(1, 20, size=2)
        p = rng.uniform(0.01, 0.99, size=shape)
        numeric = central_difference(lambda q: tv_loss(q, eps)[0], p)
        assert rel_err(tv_loss(p, eps)[1], numeric) < 1e-6


def test_topo_loss_combines_terms():
    rng = np.random.default_rng(2)
    p = rng.uniform(size=(6, 6))
    y = (rng.random((6, 6)) < 0.5).astype(np.uint8)
    v, g = topo_loss(p, y, w_euler=2.0, w_tv=0.5)
    ev, eg = soft_euler_loss(p, y)
    tv, tg = tv_loss(p)
    assert v == pytest.approx(2 * ev + 0.5 * tv)
    np.testing.assert_allclose(g, 2 * eg + 0.5 * tg)


def test_schedule_examples():
    base = LossWeights(w_seg=1.0, w_contrast=0.3, w_topo=1.0)
    assert loss_weight_schedule(5, 10, 0, base).w_topo == 0.0
    assert loss_weight_schedule(10, 10, 0, base).w_topo == 1.0
    w = loss_weight_schedule(12, 10, 4, base)
    assert w.w_topo == 0.5
    assert (w.w_seg, w.w_contrast, w.epoch) == (1.0, 0.3, 12)
    # default warm-up is ten epochs with a hard step
    assert loss_weight_schedule(9).w_topo == 0.0
    assert loss_weight_schedule(10).w_topo == 1.0


def test_schedule_rejects_negative_epoch():
    with pytest.raises(ValueError):
        loss_weight_schedule(-1)


@given(st.integers(0, 30), st.integers(0, 10), st.floats(0, 5))
def test_schedule_is_monotone(warmup, ramp, w):
    base = LossWeights(w_topo=w)
    seq = [loss_weight_schedule(e, warmup, ramp, base).w_topo for e in range(50)]
    assert all(a <= b for a, b in zip(seq, seq[1:]))
    assert seq[-1] == pytest.approx(w)


@settings(max_examples=100, deadline=None)
@given(st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
    lambda s: arrays(np.float64, s, elements=st.floats(0, 1))))
def test_loss_zero_iff_chi_matches(p):
    y = (p > 0.5).astype(np.uint8)
    value, _ = soft_euler_loss(p, y)
    assert value >= 0
    diff = soft_euler_char(p) - euler_characteristic(y)
    if diff == 0:
        assert value == 0
    elif abs(diff) > 1e-150:  # smaller differences underflow when squared
        assert value > 0


def test_soft_euler_is_deterministic():
    p = np.random.default_rng(0).random((300, 300))
    assert soft_euler_char(p) == soft_euler_char(p.copy())
