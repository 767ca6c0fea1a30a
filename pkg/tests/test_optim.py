import math

import numpy as np
import pytest

from rbe.encoder import EncoderParams, Grads
from rbe.errors import RBEError
from rbe.optim import AdamWConfig, AdamWState, adamw_step, lr_at


def tiny_params(value=1.0):
    return EncoderParams(
        emb=np.full((3, 2), value),
        proj_w=np.full((2, 2), value),
        proj_b=np.full((2,), value),
    )


def test_lr_schedule_endpoints():
    assert lr_at(0, 100, lr=1e-3) == 0.0
    warmup = math.ceil(0.1 * 100)
    assert lr_at(warmup, 100, lr=1e-3) == pytest.approx(1e-3)
    assert lr_at(100, 100, lr=1e-3) == pytest.approx(0.0, abs=1e-12)


def test_lr_schedule_shape():
    lrs = [lr_at(s, 100, lr=1.0) for s in range(101)]
    assert all(lrs[i] <= lrs[i + 1] + 1e-12 for i in range(9))   # warmup rises
    assert all(lrs[i] >= lrs[i + 1] - 1e-12 for i in range(10, 100))  # decay


def test_lr_out_of_range():
    with pytest.raises(RBEError):
        lr_at(101, 100, lr=1.0)


def test_zero_grads_no_decay_leaves_params():
    p = tiny_params(0.5)
    state = AdamWState.zeros_like(p)
    adamw_step(p, Grads.zeros_like(p), state, lr=1e-2,
               cfg=AdamWConfig(weight_decay=0.0))
    assert np.all(p.emb == 0.5)
    assert np.all(p.proj_w == 0.5)


def test_zero_grads_with_decay_shrinks_multiplicatively():
    p = tiny_params(0.5)
    state = AdamWState.zeros_like(p)
    lr, wd = 1e-2, 0.01
    adamw_step(p, Grads.zeros_like(p), state, lr=lr,
               cfg=AdamWConfig(weight_decay=wd))
    np.testing.assert_allclose(p.emb, 0.5 * (1 - lr * wd))


def test_three_step_scalar_recurrence():
    # independent hand-stepped AdamW on a single scalar parameter
    cfg = AdamWConfig(lr=0.1, weight_decay=0.01)
    lr = 0.1
    grads_seq = [0.3, -0.2, 0.7]

    theta, m, v = 1.0, 0.0, 0.0
    for t, g in enumerate(grads_seq, start=1):
        m = cfg.beta1 * m + (1 - cfg.beta1) * g
        v = cfg.beta2 * v + (1 - cfg.beta2) * g * g
        mhat = m / (1 - cfg.beta1 ** t)
        vhat = v / (1 - cfg.beta2 ** t)
        theta -= lr * mhat / (math.sqrt(vhat) + cfg.eps)
        theta -= lr * cfg.weight_decay * theta

    p = EncoderParams(emb=np.ones((1, 1)), proj_w=np.zeros((1, 1)),
                      proj_b=np.zeros((1,)))
    state = AdamWState.zeros_like(p)
    for g in grads_seq:
        grads = Grads(np.array([[g]]), np.zeros((1, 1)), np.zeros((1,)))
        adamw_step(p, grads, state, lr=lr, cfg=cfg)
    assert p.emb[0, 0] == pytest.approx(theta, abs=1e-10)


def test_nonfinite_update_detected():
    p = tiny_params(1.0)
    state = AdamWState.zeros_like(p)
    bad = Grads(np.full((3, 2), np.nan), np.zeros((2, 2)), np.zeros((2,)))
    with pytest.raises(RBEError):
        adamw_step(p, bad, state, lr=0.1, cfg=AdamWConfig())
