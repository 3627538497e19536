import math

import numpy as np
import pytest

import nncov
from nncov import ArgumentError, DimensionError, LayerSpec, Model, Tensor
from conftest import random_model
from oracles import fd_gradient_check, forward_reference


def dense(weights, bias, activation="identity"):
    w = np.asarray(weights, dtype=np.float32)
    b = np.asarray(bias, dtype=np.float32).reshape(1, -1)
    return LayerSpec(w.shape[0], w.shape[1], activation, Tensor.from_array(w), Tensor.from_array(b))


def test_forward_identity_layer():
    model = Model([dense(np.eye(2), [0.0, 0.0])])
    trace, logits = nncov.forward(model, Tensor.row([1.0, 2.0]))
    assert np.array_equal(trace.layers[0], np.array([1.0, 2.0], dtype=np.float32))
    assert np.array_equal(logits.data, np.array([1.0, 2.0], dtype=np.float32))


def test_forward_zero_weights_relu_keeps_positive_bias():
    model = Model([dense(np.zeros((3, 2)), [5.0, -5.0], "relu")])
    for point in ([0.0, 0.0, 0.0], [1.0, -2.0, 3.0]):
        trace, _ = nncov.forward(model, Tensor.row(point))
        assert np.array_equal(trace.layers[0], np.array([5.0, 0.0], dtype=np.float32))


def test_forward_matches_reference_two_layer_net():
    rng = np.random.default_rng(21)
    for _ in range(5):
        model = random_model(rng)
        x = rng.uniform(-1, 1, size=model.input_size).astype(np.float32)
        trace, _ = nncov.forward(model, Tensor.row(x))
        expected = forward_reference(model, x)
        for got, want in zip(trace.layers, expected):
            assert np.all(np.abs(got.astype(np.float64) - want) <= 1e-6 * np.maximum(np.abs(want), 1.0))


def test_forward_shape_mismatch():
    model = Model([dense(np.eye(2), [0.0, 0.0])])
    with pytest.raises(DimensionError):
        nncov.forward(model, Tensor.row([1.0, 2.0, 3.0]))


def test_forward_deterministic_bit_identical():
    rng = np.random.default_rng(2)
    model = random_model(rng)
    x = Tensor.row(rng.uniform(-1, 1, size=model.input_size).astype(np.float32))
    t1, l1 = nncov.forward(model, x)
    t2, l2 = nncov.forward(model, x)
    assert t1 == t2
    assert l1 == l2


def test_trace_matches_model_layout():
    rng = np.random.default_rng(14)
    model = random_model(rng)
    trace, _ = nncov.forward(model, Tensor.row(np.zeros(model.input_size, dtype=np.float32)))
    assert [a.size for a in trace.layers] == model.layer_sizes


def test_uniform_logits_loss_is_log_num_classes():
    model = Model([dense(np.zeros((2, 4)), np.zeros(4))])
    for label in range(4):
        loss, _, _ = nncov.loss_and_gradients(model, Tensor.row([0.3, -0.7]), label)
        assert loss == pytest.approx(math.log(4), rel=1e-6)


def test_label_out_of_range():
    model = Model([dense(np.zeros((2, 3)), np.zeros(3))])
    with pytest.raises(ArgumentError):
        nncov.loss_and_gradients(model, Tensor.row([0.0, 0.0]), 3)
    with pytest.raises(ArgumentError):
        nncov.loss_and_gradients(model, Tensor.row([0.0, 0.0]), -1)


def test_input_gradient_closed_form_linear_model():
    rng = np.random.default_rng(3)
    w = rng.standard_normal((3, 4)).astype(np.float32)
    b = rng.standard_normal(4).astype(np.float32)
    model = Model([dense(w, b)])
    x = rng.uniform(-1, 1, size=3).astype(np.float32)
    label = 2
    _, _, input_grad = nncov.loss_and_gradients(model, Tensor.row(x), label)

    z = x.astype(np.float64) @ w.astype(np.float64) + b.astype(np.float64)
    p = np.exp(z - z.max())
    p /= p.sum()
    p[label] -= 1.0
    expected = p @ w.astype(np.float64).T
    assert np.allclose(input_grad.data.astype(np.float64), expected, rtol=1e-5, atol=1e-7)


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(17)
    for _ in range(3):
        model = random_model(rng, min_width=3, max_width=6)
        x = rng.uniform(-1, 1, size=model.input_size).astype(np.float32)
        label = int(rng.integers(model.num_classes))
        worst, checked, skipped = fd_gradient_check(nncov, model, x, label)
        assert checked > 0
        assert worst <= 1e-4


def test_predict_matches_forward_argmax():
    rng = np.random.default_rng(6)
    model = random_model(rng)
    for _ in range(10):
        x = Tensor.row(rng.uniform(-1, 1, size=model.input_size).astype(np.float32))
        _, logits = nncov.forward(model, x)
        assert nncov.predict(model, x) == int(np.argmax(logits.data))


def test_predict_trivial_and_tie():
    model = Model([dense(np.eye(2), [0.0, 0.0])])
    assert nncov.predict(model, Tensor.row([0.1, 0.9])) == 1
    assert nncov.predict(model, Tensor.row([0.5, 0.5])) == 0


def test_train_lr_zero_keeps_weights_bit_exact():
    data = nncov.make_synthetic_dataset("blobs", 20, seed=3)
    model = nncov.build_mlp([2, 4, 2], seed=9)
    result = nncov.train_sgd(model, data, epochs=3, lr=0.0, batch_size=4, seed=1)
    for before, after in zip(model.layers, result.model.layers):
        assert np.array_equal(before.weights.data, after.weights.data)
        assert np.array_equal(before.bias.data, after.bias.data)
    assert result.model.model_id == model.model_id


def test_train_separable_blobs_reaches_95_percent():
    data = nncov.make_synthetic_dataset("blobs", 120, seed=5)
    result = nncov.train_sgd(
        nncov.build_mlp([2, 8, 2], seed=0), data, epochs=50, lr=0.5, batch_size=16, seed=4
    )
    assert result.final_accuracy >= 0.95


def test_first_epoch_improves_loss():
    data = nncov.make_synthetic_dataset("blobs", 60, seed=8)
    model = nncov.build_mlp([2, 8, 2], seed=2)
    initial = nncov.dataset_loss(model, data)
    result = nncov.train_sgd(model, data, epochs=1, lr=0.5, batch_size=8, seed=3)
    assert nncov.dataset_loss(result.model, data) < initial


def test_train_is_seeded_and_pure():
    data = nncov.make_synthetic_dataset("blobs", 30, seed=2)
    model = nncov.build_mlp([2, 4, 2], seed=5)
    r1 = nncov.train_sgd(model, data, epochs=4, lr=0.3, batch_size=8, seed=11)
    r2 = nncov.train_sgd(model, data, epochs=4, lr=0.3, batch_size=8, seed=11)
    assert r1.model.model_id == r2.model.model_id
    # a different shuffle seed changes the result
    r3 = nncov.train_sgd(model, data, epochs=4, lr=0.3, batch_size=8, seed=12)
    assert r3.model.model_id != r1.model.model_id


def test_train_rejects_empty_dataset():
    empty = nncov.Dataset(np.zeros((0, 2), dtype=np.float32), np.zeros(0, dtype=np.uint32), 2)
    with pytest.raises(ArgumentError):
        nncov.train_sgd(nncov.build_mlp([2, 4, 2], seed=0), empty, epochs=1, lr=0.1)


def test_model_layer_chaining_enforced():
    with pytest.raises(DimensionError):
        Model([dense(np.zeros((2, 3)), np.zeros(3)), dense(np.zeros((4, 2)), np.zeros(2))])


def test_model_id_changes_with_weights():
    a = nncov.build_mlp([2, 4, 2], seed=1)
    b = nncov.build_mlp([2, 4, 2], seed=2)
    assert a.model_id != b.model_id
    assert a.model_id == nncov.build_mlp([2, 4, 2], seed=1).model_id
