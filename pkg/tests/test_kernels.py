"""Both kernel backends against each other and against naive oracles."""

import numpy as np
import pytest

from augclust.kernels import _numpy_impl
from conftest import fd_gradient, rel_error

BACKENDS = [_numpy_impl]
try:
    from augclust.kernels import _ckernels
    BACKENDS.append(_ckernels)
except ImportError:
    pass

IDS = [b.BACKEND for b in BACKENDS]


def naive_ntxent(sim, temp, exclude_diagonal=True):
    """Straight-line double loop, the independent oracle."""
    n = sim.shape[0]
    total = 0.0
    for i in range(n):
        denom = 0.0
        for k in range(n):
            if exclude_diagonal and k == i:
                continue
            denom += np.exp(sim[i, k] / temp)
        total += -np.log(np.exp(sim[i, i] / temp) / denom)
    return total / n


@pytest.mark.parametrize("impl", BACKENDS, ids=IDS)
@pytest.mark.parametrize("exclude", [True, False])
def test_ntxent_matches_naive_oracle(impl, exclude):
    rng = np.random.default_rng(3)
    sim = rng.uniform(-1, 1, size=(5, 5))
    loss, _ = impl.ntxent_loss_grad(sim, 0.5, exclude)
    assert abs(loss - naive_ntxent(sim, 0.5, exclude)) < 1e-10


@pytest.mark.parametrize("impl", BACKENDS, ids=IDS)
def test_ntxent_identity_two_samples(impl):
    loss, _ = impl.ntxent_loss_grad(np.eye(2), 1.0, True)
    assert loss == pytest.approx(-1.0)


@pytest.mark.parametrize("impl", BACKENDS, ids=IDS)
@pytest.mark.parametrize("exclude", [True, False])
def test_ntxent_gradient_matches_finite_differences(impl, exclude):
    rng = np.random.default_rng(4)
    sim = rng.uniform(-1, 1, size=(6, 6))
    _, grad = impl.ntxent_loss_grad(sim, 0.7, exclude)
    fd = fd_gradient(lambda: impl.ntxent_loss_grad(sim, 0.7, exclude)[0], sim)
    assert rel_error(grad, fd) < 1e-6


@pytest.mark.parametrize("impl", BACKENDS, ids=IDS)
def test_ntxent_input_validation(impl):
    with pytest.raises(ValueError):
        impl.ntxent_loss_grad(np.ones((1, 1)), 1.0, True)
    with pytest.raises(ValueError):
        impl.ntxent_loss_grad(np.ones((3, 2)), 1.0, True)
    with pytest.raises(ValueError):
        impl.ntxent_loss_grad(np.eye(3), 0.0, True)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels unavailable")
def test_backends_agree():
    rng = np.random.default_rng(5)
    sim = rng.standard_normal((40, 40))
    for exclude in (True, False):
        l_np, g_np = _numpy_impl.ntxent_loss_grad(sim, 0.4, exclude)
        l_cy, g_cy = _ckernels.ntxent_loss_grad(sim, 0.4, exclude)
        assert abs(l_np - l_cy) < 1e-12
        np.testing.assert_allclose(g_np, g_cy, atol=1e-14)

    points = rng.standard_normal((200, 7))
    cents = rng.standard_normal((6, 7))
    lab_np, d_np = _numpy_impl.kmeans_assign(points, cents)
    lab_cy, d_cy = _ckernels.kmeans_assign(points, cents)
    np.testing.assert_array_equal(lab_np, lab_cy)
    np.testing.assert_allclose(d_np, d_cy, atol=1e-10)


@pytest.mark.parametrize("impl", BACKENDS, ids=IDS)
def test_kmeans_assign_basics(impl):
    points = np.array([[0.0, 0.0], [5.0, 5.0], [5.1, 5.0]])
    cents = np.array([[0.0, 0.0], [5.0, 5.0]])
    labels, dists = impl.kmeans_assign(points, cents)
    np.testing.assert_array_equal(labels, [0, 1, 1])
    np.testing.assert_allclose(dists, [0.0, 0.0, 0.01 ** 2], atol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS, ids=IDS)
def test_kmeans_assign_tie_breaks_low(impl):
    points = np.array([[0.0, 0.0]])
    cents = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])  # all distance 1
    labels, _ = impl.kmeans_assign(points, cents)
    assert labels[0] == 0
