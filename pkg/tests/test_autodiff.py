import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augclust import autodiff as ad
from conftest import fd_gradient, rel_error

RNG = np.random.default_rng(42)


def test_matmul_identity():
    m = RNG.standard_normal((2, 3))
    out = ad.matmul(ad.constant(np.eye(2)), ad.constant(m))
    np.testing.assert_allclose(out.value, m)


def test_matmul_hand_case():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = ad.matmul(ad.constant(a), ad.constant(b))
    np.testing.assert_allclose(out.value, [[2.0, 1.0], [4.0, 3.0]])


def test_matmul_dimension_mismatch():
    with pytest.raises(ValueError):
        ad.matmul(ad.constant(np.ones((2, 3))), ad.constant(np.ones((2, 3))))


def test_matmul_gradient_is_ones_bt():
    a = RNG.standard_normal((3, 4))
    b = RNG.standard_normal((4, 2))
    av = ad.parameter(a)
    loss = ad.sumv(ad.matmul(av, ad.constant(b)))
    ad.backward(loss)
    np.testing.assert_allclose(av.grad, np.ones((3, 2)) @ b.T)


def test_hadamard_trivials_and_hand_case():
    m = RNG.standard_normal((2, 2))
    np.testing.assert_allclose(
        ad.hadamard(ad.constant(m), ad.constant(np.ones((2, 2)))).value, m)
    np.testing.assert_allclose(
        ad.hadamard(ad.constant(m), ad.constant(np.zeros((2, 2)))).value, 0.0)
    out = ad.hadamard(ad.constant([[1.0, 2.0], [3.0, 4.0]]),
                      ad.constant([[2.0, 0.0], [0.0, 2.0]]))
    np.testing.assert_allclose(out.value, [[2.0, 0.0], [0.0, 8.0]])
    with pytest.raises(ValueError):
        ad.hadamard(ad.constant(np.ones((2, 2))), ad.constant(np.ones((2, 3))))


def test_row_softmax_uniform_and_hand_case():
    out = ad.row_softmax(ad.constant(np.full((3, 5), 2.5)), 1.0)
    np.testing.assert_allclose(out.value, 0.2)
    out = ad.row_softmax(ad.constant([[0.0, np.log(3.0)]]), 1.0)
    np.testing.assert_allclose(out.value, [[0.25, 0.75]])
    with pytest.raises(ValueError):
        ad.row_softmax(ad.constant(np.ones((2, 2))), 0.0)


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.2, 5.0))
def test_row_softmax_rows_sum_to_one(seed, scl):
    a = np.random.default_rng(seed).standard_normal((4, 6)) * 3
    out = ad.row_softmax(ad.constant(a), scl)
    np.testing.assert_allclose(out.value.sum(axis=1), 1.0, atol=1e-12)
    # mathematically open (0, 1); the float image saturates at the ends
    assert out.value.min() >= 0 and out.value.max() <= 1


def test_row_l2_normalize_cases():
    out = ad.row_l2_normalize(ad.constant([[3.0, 4.0]]))
    np.testing.assert_allclose(out.value, [[0.6, 0.8]])
    unit = np.array([[0.6, 0.8]])
    np.testing.assert_allclose(
        ad.row_l2_normalize(ad.constant(unit)).value, unit)
    zero = ad.parameter(np.zeros((1, 3)))
    out = ad.row_l2_normalize(zero)
    np.testing.assert_allclose(out.value, 0.0)
    ad.backward(ad.sumv(out))
    np.testing.assert_allclose(zero.grad, 0.0)  # zero-row gradient is zero


def test_cosine_similarity_cases():
    a = np.eye(3)
    out = ad.cosine_similarity_matrix(ad.constant(a), ad.constant(a))
    np.testing.assert_allclose(out.value, np.eye(3), atol=1e-12)
    out = ad.cosine_similarity_matrix(ad.constant([[1.0, 0.0]]),
                                      ad.constant([[0.0, 1.0]]))
    np.testing.assert_allclose(out.value, 0.0, atol=1e-12)
    out = ad.cosine_similarity_matrix(ad.constant([[1.0, 0.0]]),
                                      ad.constant([[1.0, 1.0]]))
    np.testing.assert_allclose(out.value, 1.0 / np.sqrt(2), atol=1e-12)


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2 ** 31 - 1))
def test_cosine_similarity_bounds(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((5, 3)) * 4
    b = rng.standard_normal((6, 3)) * 4
    out = ad.cosine_similarity_matrix(ad.constant(a), ad.constant(b)).value
    assert out.min() >= -1 - 1e-12 and out.max() <= 1 + 1e-12


def test_activations():
    np.testing.assert_allclose(
        ad.relu(ad.constant([[-1.0, 2.0]])).value, [[0.0, 2.0]])
    np.testing.assert_allclose(ad.tanh(ad.constant([[0.0]])).value, 0.0)
    np.testing.assert_allclose(
        ad.leaky_relu(ad.constant([[-5.0]]), 0.2).value, [[-1.0]])
    np.testing.assert_allclose(
        ad.elementwise_activation(ad.constant([[-5.0]]), "leaky_relu").value,
        [[-1.0]])
    with pytest.raises(ValueError):
        ad.elementwise_activation(ad.constant([[1.0]]), "gelu")


def test_backward_sum_gives_ones():
    w = ad.parameter(RNG.standard_normal((3, 4)))
    ad.backward(ad.sumv(w))
    np.testing.assert_allclose(w.grad, 1.0)


def test_backward_frobenius_square_gives_2w():
    arr = RNG.standard_normal((3, 4))
    w = ad.parameter(arr)
    ad.backward(ad.sumv(ad.mul(w, w)))
    np.testing.assert_allclose(w.grad, 2 * arr)
    fd = fd_gradient(lambda: float((arr * arr).sum()), arr)
    assert rel_error(w.grad, fd) < 1e-5


def test_backward_accumulates_over_fanout():
    arr = RNG.standard_normal((2, 2))
    w = ad.parameter(arr)
    # w feeds two consumers; adjoints must sum
    loss = ad.add(ad.sumv(ad.mul(w, w)), ad.sumv(ad.scale(w, 3.0)))
    ad.backward(loss)
    np.testing.assert_allclose(w.grad, 2 * arr + 3.0)


def test_backward_requires_scalar():
    w = ad.parameter(np.ones((2, 2)))
    with pytest.raises(ValueError):
        ad.backward(ad.mul(w, w))


def test_nonfinite_input_rejected():
    with pytest.raises(ad.NumericError):
        ad.constant(np.array([[1.0, np.inf]]))
    big = ad.constant(np.array([[1e308]]))
    with np.errstate(over="ignore"):
        with pytest.raises(ad.NumericError):
            ad.mul(big, big)


_C32 = np.random.default_rng(10).standard_normal((3, 2))
_C43 = np.random.default_rng(11).standard_normal((4, 3))
_C53 = np.random.default_rng(12).standard_normal((5, 3))
_C34 = np.random.default_rng(13).standard_normal((3, 4))
_MASK = np.array([[True, False, True],
                  [True, True, False],
                  [False, True, True],
                  [True, True, True]])


def _softmax_like_ops():
    # op name -> builder from a tape node; constants are fixed module-wide
    return {
        "matmul": lambda v: ad.matmul(v, ad.constant(_C32)),
        "mul": lambda v: ad.mul(v, ad.constant(_C43)),
        "add": lambda v: ad.add(v, ad.constant(_C43)),
        "sub": lambda v: ad.sub(ad.constant(_C43), v),
        "neg": ad.neg,
        "transpose": ad.transpose,
        "tanh": ad.tanh,
        "relu": ad.relu,
        "leaky_relu": lambda v: ad.leaky_relu(v, 0.2),
        "row_softmax": lambda v: ad.row_softmax(v, np.sqrt(3.0)),
        "masked_row_softmax": lambda v: ad.masked_row_softmax(v, _MASK),
        "row_l2_normalize": ad.row_l2_normalize,
        "cosine_similarity": lambda v: ad.cosine_similarity_matrix(
            v, ad.constant(_C53)),
        "row_sums": ad.row_sums,
        "clamp": lambda v: ad.clamp(v, -0.5, 0.5),
        "scale": lambda v: ad.scale(v, -1.7),
        "ntxent": lambda v: ad.ntxent_from_similarity(
            ad.matmul(v, ad.constant(_C34)), 0.7),
        "ntxent_standard": lambda v: ad.ntxent_from_similarity(
            ad.matmul(v, ad.constant(_C34)), 0.7, exclude_diagonal=False),
    }


@pytest.mark.parametrize("name", sorted(_softmax_like_ops()))
def test_op_gradients_match_finite_differences(name):
    """Analytic gradients agree with central differences on 4x3 inputs."""
    build = _softmax_like_ops()[name]
    arr = np.random.default_rng(hash(name) % 2 ** 32).standard_normal((4, 3))
    weights = np.random.default_rng(1).standard_normal(
        build(ad.constant(arr)).value.shape)

    def loss_value():
        out = build(ad.constant(arr))
        return float((out.value * weights).sum())

    v = ad.parameter(arr)
    loss = ad.sumv(ad.mul(build(v), ad.constant(weights)))
    ad.backward(loss)
    fd = fd_gradient(loss_value, arr)
    assert rel_error(v.grad, fd) < 1e-5


def test_power_and_clamp_values():
    out = ad.power(ad.constant([[4.0, 9.0]]), -0.5)
    np.testing.assert_allclose(out.value, [[0.5, 1.0 / 3.0]])
    out = ad.clamp(ad.constant([[-2.0, 0.3, 7.0]]), 0.0, 1.0)
    np.testing.assert_allclose(out.value, [[0.0, 0.3, 1.0]])


def test_determinism_same_inputs_same_outputs():
    arr = RNG.standard_normal((6, 6))
    def run():
        v = ad.parameter(arr.copy())
        loss = ad.sumv(ad.row_softmax(ad.matmul(v, ad.transpose(v)), 2.0))
        ad.backward(loss)
        return loss.value.copy(), v.grad.copy()
    l1, g1 = run()
    l2, g2 = run()
    assert np.array_equal(l1, l2) and np.array_equal(g1, g2)
