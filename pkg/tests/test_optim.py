import numpy as np
import pytest

from augclust.optim import Adam, clip_global_norm


def scalar_adam_trace(x0, grads, lr, b1=0.9, b2=0.999, eps=1e-8):
    """Hand-rolled scalar reference trace."""
    x, m, v = x0, 0.0, 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        x = x - lr * m_hat / (np.sqrt(v_hat) + eps)
        out.append(x)
    return out


def test_zero_gradient_leaves_everything_unchanged():
    p = np.array([[1.0, -2.0]])
    opt = Adam({"w": p}, lr=0.1)
    opt.step({"w": np.zeros_like(p)})
    np.testing.assert_array_equal(p, [[1.0, -2.0]])
    np.testing.assert_array_equal(opt.m["w"], 0.0)
    np.testing.assert_array_equal(opt.v["w"], 0.0)


def test_first_step_is_sign_scaled():
    g = np.array([[0.3, -7.0, 1e-3]])
    p = np.zeros_like(g)
    opt = Adam({"w": p}, lr=0.05)
    opt.step({"w": g.copy()})
    # with bias correction the first update is -lr * g / (|g| + eps)
    expected = -0.05 * g / (np.abs(g) + 1e-8)
    np.testing.assert_allclose(p, expected, rtol=1e-12)


def test_two_steps_match_scalar_oracle():
    grads = [0.7, -0.3]
    p = np.array([2.0])
    opt = Adam({"w": p}, lr=0.01)
    opt.step({"w": np.array([grads[0]])})
    opt.step({"w": np.array([grads[1]])})
    ref = scalar_adam_trace(2.0, grads, lr=0.01)
    np.testing.assert_allclose(p, ref[-1], rtol=1e-14)


def test_shape_mismatch_rejected():
    opt = Adam({"w": np.zeros((2, 2))}, lr=0.1)
    with pytest.raises(ValueError):
        opt.step({"w": np.zeros((2, 3))})


def test_bad_learning_rate_rejected():
    with pytest.raises(ValueError):
        Adam({"w": np.zeros(2)}, lr=0.0)


def test_clip_scales_down_only_when_above():
    g1 = {"a": np.array([3.0, 4.0])}  # norm 5
    norm = clip_global_norm(g1, 10.0)
    assert norm == pytest.approx(5.0)
    np.testing.assert_allclose(g1["a"], [3.0, 4.0])

    g2 = {"a": np.array([3.0, 4.0]), "b": np.array([12.0])}  # norm 13
    norm = clip_global_norm(g2, 6.5)
    assert norm == pytest.approx(13.0)
    total = np.sqrt(sum((g * g).sum() for g in g2.values()))
    assert total == pytest.approx(6.5)


def test_clip_disabled_with_zero():
    g = {"a": np.array([30.0, 40.0])}
    clip_global_norm(g, 0.0)
    np.testing.assert_allclose(g["a"], [30.0, 40.0])
