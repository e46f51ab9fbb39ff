import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from disco import autograd as ag
from disco.autograd import DimensionError, Tensor


def numeric_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        old = x[i]
        x[i] = old + h
        up = f(x)
        x[i] = old - h
        down = f(x)
        x[i] = old
        g[i] = (up - down) / (2 * h)
    return g


def check_unary(op, x, tol=1e-6):
    w = np.random.default_rng(0).normal(size=op(Tensor(x)).shape)
    t = Tensor(x.copy(), requires_grad=True)
    ag.backward(ag.sum(ag.multiply(op(t), Tensor(w))))
    num = numeric_grad(lambda v: float((op(Tensor(v)).data * w).sum()), x.copy())
    np.testing.assert_allclose(t.grad, num, rtol=tol, atol=tol)


finite = st.floats(-3, 3, allow_nan=False, width=64)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (3, 4), elements=finite))
def test_elementwise_gradients(x):
    for op in (ag.sigmoid, ag.tanh, ag.exp, lambda t: ag.scale(t, -2.5),
               lambda t: ag.softmax(t, axis=-1), lambda t: ag.mean(t, axis=0)):
        check_unary(op, x)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (4,), elements=st.floats(0.1, 5, width=64)))
def test_log_gradient(x):
    check_unary(ag.log, x)


def test_leaky_relu_values_and_gradient():
    x = np.array([-2.0, -0.5, 0.5, 3.0])
    np.testing.assert_allclose(ag.leaky_relu(Tensor(x)).data, [-0.4, -0.1, 0.5, 3.0])
    check_unary(ag.leaky_relu, x)


def test_binary_broadcasting_gradients(rng):
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(4,)) + 3.0
    for op in (ag.add, ag.subtract, ag.multiply, ag.divide):
        ta, tb = Tensor(a, requires_grad=True), Tensor(b, requires_grad=True)
        ag.backward(ag.sum(op(ta, tb)))
        na = numeric_grad(lambda v: float(op(Tensor(v), Tensor(b)).data.sum()), a.copy())
        nb = numeric_grad(lambda v: float(op(Tensor(a), Tensor(v)).data.sum()), b.copy())
        np.testing.assert_allclose(ta.grad, na, atol=1e-6)
        np.testing.assert_allclose(tb.grad, nb, atol=1e-6)
        assert tb.grad.shape == b.shape


def test_batched_matmul_gradient(rng):
    a = rng.normal(size=(2, 3, 4))
    b = rng.normal(size=(4, 5))
    ta, tb = Tensor(a, requires_grad=True), Tensor(b, requires_grad=True)
    ag.backward(ag.sum(ag.matmul(ta, tb)))
    nb = numeric_grad(lambda v: float((a @ v).sum()), b.copy())
    np.testing.assert_allclose(tb.grad, nb, atol=1e-6)
    np.testing.assert_allclose(ta.grad, np.broadcast_to(b.sum(axis=1), a.shape), atol=1e-12)


def test_matmul_shape_error_names_primitive():
    with pytest.raises(DimensionError, match="matmul"):
        ag.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))))


def test_gather_accumulates_repeated_rows():
    t = Tensor(np.arange(6.0).reshape(3, 2), requires_grad=True)
    ag.backward(ag.sum(ag.gather(t, [0, 2, 0])))
    np.testing.assert_array_equal(t.grad, [[2, 2], [0, 0], [1, 1]])


def test_gather_out_of_range():
    with pytest.raises(IndexError):
        ag.gather(Tensor(np.ones((3, 2))), [3])


def test_structural_ops_roundtrip(rng):
    x = rng.normal(size=(2, 3, 4))
    check_unary(lambda t: ag.reshape(t, (6, 4)), x)
    check_unary(lambda t: ag.swapaxes(t, 1, 2), x)
    check_unary(lambda t: ag.concat([t, ag.scale(t, 2.0)], axis=1), x)
    check_unary(lambda t: ag.stack([t, t], axis=1), x)
    check_unary(lambda t: ag.norm(t, axis=-1), x)


def test_cosine_similarity_gradient_and_scale_invariance(rng):
    a, b = rng.normal(size=(5, 6)), rng.normal(size=(5, 6))
    check_unary(lambda t: ag.cosine_similarity(t, Tensor(b)), a)
    base = ag.cosine_similarity(Tensor(a), Tensor(b)).data
    scaled = ag.cosine_similarity(Tensor(3.0 * a), Tensor(0.2 * b)).data
    np.testing.assert_allclose(base, scaled, atol=1e-10)
    np.testing.assert_allclose(ag.cosine_similarity(Tensor(a), Tensor(a)).data, 1.0, atol=1e-12)


def test_cosine_zero_vector_is_zero():
    out = ag.cosine_similarity(Tensor(np.zeros((1, 3))), Tensor(np.ones((1, 3))))
    assert out.data[0] == 0.0


def test_sign_is_constant():
    t = Tensor(np.array([-1.5, 0.0, 2.0]), requires_grad=True)
    s = ag.sign(t)
    np.testing.assert_array_equal(s.data, [-1, 0, 1])
    ag.backward(ag.sum(ag.add(ag.multiply(s, Tensor(np.ones(3))), t)))
    np.testing.assert_array_equal(t.grad, np.ones(3))


def test_sigmoid_is_stable_at_extremes():
    out = ag.sigmoid(Tensor(np.array([-800.0, 800.0]))).data
    assert np.isfinite(out).all() and out[0] >= 0 and out[1] == 1.0


def test_reused_node_accumulates():
    x = Tensor(np.array(3.0), requires_grad=True)
    y = ag.multiply(x, x)
    ag.backward(ag.add(y, y))
    assert x.grad == pytest.approx(12.0)


def test_backward_requires_scalar():
    with pytest.raises(ValueError):
        ag.backward(Tensor(np.ones(3), requires_grad=True))


def test_no_grad_records_nothing():
    x = Tensor(np.ones(2), requires_grad=True)
    with ag.no_grad():
        assert not ag.grad_enabled()
        y = ag.sum(ag.multiply(x, x))
    assert ag.grad_enabled()
    assert not y.requires_grad


def test_deep_chain_does_not_recurse():
    x = Tensor(np.array(1.0), requires_grad=True)
    y = x
    for _ in range(5000):
        y = ag.add(y, Tensor(np.array(0.0)))
    ag.backward(y)
    assert x.grad == 1.0
