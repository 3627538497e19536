import numpy as np
import pytest

from nncov import DimensionError, Tensor, argmax, matmul, relu, softmax
from oracles import naive_matmul


def test_matmul_identity():
    eye = Tensor.from_array(np.eye(2, dtype=np.float32))
    m = Tensor.from_array([[1.0, 2.0], [3.0, 4.0]])
    assert matmul(eye, m) == m


def test_matmul_hand_computed():
    a = Tensor.from_array([[1.0, 2.0]])
    b = Tensor.from_array([[3.0], [4.0]])
    out = matmul(a, b)
    assert out.shape == (1, 1)
    assert out.data[0] == 11.0


def test_matmul_against_triple_loop():
    rng = np.random.default_rng(42)
    a = Tensor.from_array(rng.standard_normal((5, 7)).astype(np.float32))
    b = Tensor.from_array(rng.standard_normal((7, 3)).astype(np.float32))
    expected = naive_matmul(a.array, b.array)
    got = matmul(a, b).array.astype(np.float64)
    assert np.all(np.abs(got - expected) <= 1e-6 * np.maximum(np.abs(expected), 1e-12))


def test_matmul_shape_mismatch_names_both_shapes():
    a = Tensor.zeros(2, 3)
    b = Tensor.zeros(4, 2)
    with pytest.raises(DimensionError, match=r"\(2, 3\).*\(4, 2\)"):
        matmul(a, b)


def test_matmul_bilinearity():
    rng = np.random.default_rng(7)
    for _ in range(10):
        a = Tensor.from_array(rng.standard_normal((3, 4)).astype(np.float32))
        b = rng.standard_normal((4, 2)).astype(np.float32)
        c = rng.standard_normal((4, 2)).astype(np.float32)
        joint = matmul(a, Tensor.from_array(b + c)).array
        split = matmul(a, Tensor.from_array(b)).array + matmul(a, Tensor.from_array(c)).array
        assert np.allclose(joint, split, rtol=1e-5, atol=1e-6)


def test_relu_sign_cases():
    t = Tensor.from_array([-1.0, 0.0, 2.0])
    assert np.array_equal(relu(t).data, np.array([0.0, 0.0, 2.0], dtype=np.float32))


def test_relu_all_negative():
    t = Tensor.from_array([[-3.0, -0.5], [-1e9, -1e-9]])
    assert np.array_equal(relu(t).data, np.zeros(4, dtype=np.float32))


def test_relu_idempotent():
    rng = np.random.default_rng(3)
    t = Tensor.from_array(rng.standard_normal(64).astype(np.float32))
    once = relu(t)
    assert relu(once) == once


def test_softmax_symmetry():
    out = softmax(Tensor.row([0.0, 0.0]))
    assert np.allclose(out.data, [0.5, 0.5])


def test_softmax_stable_for_large_inputs():
    out = softmax(Tensor.row([1000.0, 0.0]))
    assert np.all(np.isfinite(out.data))
    assert out.data[0] == pytest.approx(1.0)
    assert out.data[1] == pytest.approx(0.0, abs=1e-6)


def test_softmax_sums_to_one():
    rng = np.random.default_rng(11)
    for _ in range(20):
        out = softmax(Tensor.row(rng.uniform(-50, 50, size=9).astype(np.float32)))
        assert np.all(out.data > 0)
        assert abs(float(out.data.sum()) - 1.0) <= 1e-6


def test_argmax_basic_and_ties():
    assert argmax(Tensor.row([0.1, 0.9])) == 1
    assert argmax(Tensor.row([0.5, 0.5])) == 0


def test_argmax_matches_linear_scan():
    rng = np.random.default_rng(5)
    for _ in range(25):
        values = rng.standard_normal(13).astype(np.float32)
        best = 0
        for i in range(1, values.size):
            if values[i] > values[best]:
                best = i
        assert argmax(Tensor.row(values)) == best


def test_ops_are_pure():
    rng = np.random.default_rng(9)
    a = Tensor.from_array(rng.standard_normal((4, 6)).astype(np.float32))
    b = Tensor.from_array(rng.standard_normal((6, 2)).astype(np.float32))
    assert np.array_equal(matmul(a, b).data, matmul(a, b).data)
    assert np.array_equal(softmax(Tensor.row(a.data[:6])).data, softmax(Tensor.row(a.data[:6])).data)


def test_tensor_shape_data_agreement():
    with pytest.raises(DimensionError):
        Tensor((2, 3), np.zeros(5, dtype=np.float32))
    with pytest.raises(DimensionError):
        Tensor((0, 3), np.zeros(0, dtype=np.float32))
