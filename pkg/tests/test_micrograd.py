import math
import os

import numpy as np
import pytest

from lmlab import micrograd as mg
from lmlab import numkit


def zero_params(v=4, d=3, h=2):
    return mg.MicroNetParams(
        E=np.zeros((v, d)),
        W1=np.zeros((h, d)),
        b1=np.zeros(h),
        W2=np.zeros((1, h)),
        b2=0.0,
    )


def test_forward_zero_params_is_half():
    tr = mg.forward(zero_params(), 1)
    assert tr.yhat == 0.5
    assert tr.a2.tolist() == [0.5, 0.5]


def test_forward_rejects_bad_token():
    with pytest.raises(ValueError):
        mg.forward(zero_params(), 4)
    with pytest.raises(ValueError):
        mg.forward(zero_params(), -1)


def test_forward_zero_w1_gives_sigmoid_of_w2_sum():
    # with W1 = 0 each hidden unit sits at sigmoid(0) = 0.5
    p = zero_params()
    p.W2[0, :] = [0.4, -0.2]
    p.b2 = 0.1
    tr = mg.forward(p, 0)
    z3 = 0.5 * (0.4 - 0.2) + 0.1
    assert abs(tr.yhat - 1.0 / (1.0 + math.exp(-z3))) < 1e-15


def test_forward_matches_straight_line_recompute():
    rng = numkit.make_rng(6)
    p = mg.init_params(rng, 5, 4, 3)
    tr = mg.forward(p, 2)
    v = p.E[2]
    z2 = p.W1 @ v + p.b1
    a2 = 1.0 / (1.0 + np.exp(-z2))
    z3 = float(p.W2[0] @ a2) + p.b2
    yhat = 1.0 / (1.0 + math.exp(-z3))
    assert np.max(np.abs(tr.z2 - z2)) < 1e-12
    assert abs(tr.yhat - yhat) < 1e-12


def test_loss_examples():
    assert mg.loss(0.5, 1) == 0.125
    assert mg.loss(1.0, 1) == 0.0
    with pytest.raises(ValueError):
        mg.loss(0.5, 2)


def test_delta3_at_half():
    # yhat = 0.5, y = 1: (yhat - y) * yhat * (1 - yhat) = -0.125
    p = zero_params()
    tr = mg.forward(p, 0)
    g = mg.backward(p, tr, 1)
    assert abs(g.db2 - (-0.125)) < 1e-15


def test_backward_matches_finite_differences():
    rng = numkit.make_rng(12)
    p = mg.init_params(rng, 6, 5, 4)
    err = mg.gradient_check(p, 3, 0)
    assert err <= 1e-6


def test_finite_difference_error_shrinks_quadratically():
    rng = numkit.make_rng(19)
    p = mg.init_params(rng, 5, 4, 3)
    tr = mg.forward(p, 1)
    g = mg.backward(p, tr, 1)

    def max_err(eps):
        fd = mg.finite_difference_grads(p, 1, 1, eps)
        return max(
            float(np.max(np.abs(fd.dW1 - g.dW1))),
            float(np.max(np.abs(fd.dE - g.dE))),
        )

    e1 = max_err(1e-3)
    e2 = max_err(5e-4)
    # central differences are second order: halving eps cuts error near 4x
    assert e2 < e1 / 2.5


def test_fd_zero_gradient_point():
    # yhat == y leaves every derivative at zero
    p = zero_params()
    p.b2 = 100.0   # saturates yhat to 1.0
    fd = mg.finite_difference_grads(p, 0, 1)
    for arr in (fd.dE, fd.dW1, fd.db1, fd.dW2):
        assert np.max(np.abs(arr)) <= 1e-9
    assert abs(fd.db2) <= 1e-9


def test_embedding_gradient_row_sparse():
    rng = numkit.make_rng(14)
    p = mg.init_params(rng, 7, 4, 3)
    tr = mg.forward(p, 5)
    g = mg.backward(p, tr, 0)
    mask = np.ones(7, dtype=bool)
    mask[5] = False
    assert np.all(g.dE[mask] == 0.0)
    assert np.any(g.dE[5] != 0.0)


def test_sgd_zero_grads_bitwise_noop():
    rng = numkit.make_rng(15)
    p = mg.init_params(rng, 4, 3, 2)
    z = mg.Gradients(
        dE=np.zeros_like(p.E), dW1=np.zeros_like(p.W1), db1=np.zeros_like(p.b1),
        dW2=np.zeros_like(p.W2), db2=0.0,
    )
    q = mg.sgd_step(p, z, 0.3)
    assert q.E.tobytes() == p.E.tobytes()
    assert q.W1.tobytes() == p.W1.tobytes()
    assert q.b2 == p.b2


def test_sgd_rejects_bad_lr():
    rng = numkit.make_rng(15)
    p = mg.init_params(rng, 4, 3, 2)
    tr = mg.forward(p, 0)
    g = mg.backward(p, tr, 1)
    with pytest.raises(ValueError):
        mg.sgd_step(p, g, 0.0)


def test_sgd_only_row_k_of_embedding_moves():
    rng = numkit.make_rng(16)
    p = mg.init_params(rng, 6, 4, 3)
    tr = mg.forward(p, 2)
    g = mg.backward(p, tr, 1)
    q = mg.sgd_step(p, g, 0.1)
    for row in range(6):
        same = np.array_equal(q.E[row], p.E[row])
        assert same == (row != 2)


def test_small_lr_never_increases_loss():
    rng = numkit.make_rng(23)
    p = mg.init_params(rng, 5, 4, 4)
    for k, y in ((0, 1), (3, 0)):
        tr = mg.forward(p, k)
        before = mg.loss(tr.yhat, y)
        g = mg.backward(p, tr, y)
        q = mg.sgd_step(p, g, 0.5)
        after = mg.loss(mg.forward(q, k).yhat, y)
        assert after <= before + 1e-12


def test_training_run_converges():
    rng = numkit.make_rng(0)
    p = mg.init_params(rng, 8, 6, 5)
    k, y = 3, 1
    losses = []
    for _ in range(200):
        tr = mg.forward(p, k)
        losses.append(mg.loss(tr.yhat, y))
        p = mg.sgd_step(p, mg.backward(p, tr, y), 1.0)
    final = mg.loss(mg.forward(p, k).yhat, y)
    assert all(b <= a + 1e-15 for a, b in zip(losses, losses[1:]))
    assert final < 1e-3


def test_init_params_shapes_and_range():
    p = mg.init_params(numkit.make_rng(1), 9, 5, 4)
    assert p.E.shape == (9, 5)
    assert p.W1.shape == (4, 5)
    assert p.W2.shape == (1, 4)
    for arr in (p.E, p.W1, p.b1, p.W2):
        assert np.all(np.abs(arr) <= 0.5)


def test_save_load_round_trip(tmp_path):
    p = mg.init_params(numkit.make_rng(8), 6, 4, 3)
    mg.save_params(str(tmp_path), p, seed=8)
    q = mg.load_params(str(tmp_path))
    assert q.E.tobytes() == p.E.tobytes()
    assert q.W1.tobytes() == p.W1.tobytes()
    assert q.b1.tobytes() == p.b1.tobytes()
    assert q.W2.tobytes() == p.W2.tobytes()
    assert q.b2 == p.b2
    assert os.path.exists(os.path.join(tmp_path, "manifest.json"))
