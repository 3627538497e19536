"""Minimal dense feedforward networks with full activation capture.

A "neuron" is one post-activation scalar of a dense layer; the forward
pass records every neuron's value so coverage analysis can consume the
whole internal state, not just the output.  Gradients are exact backprop,
computed in float64 on the float32 forward values.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ArgumentError, DimensionError
from .rng import SplitMix64, fnv1a64_hex
from .tensor import Tensor

ACTIVATIONS = ("relu", "sigmoid", "identity")


@dataclass
class LayerSpec:
    """One dense layer: y = act(x @ weights + bias)."""

    input_size: int
    output_size: int
    activation: str
    weights: Tensor  # (input_size, output_size)
    bias: Tensor  # (1, output_size)
    kind: str = "dense"

    def __post_init__(self):
        if self.kind != "dense":
            raise ArgumentError(f"unsupported layer kind {self.kind!r}")
        if self.activation not in ACTIVATIONS:
            raise ArgumentError(f"unsupported activation {self.activation!r}")
        if self.weights.shape != (self.input_size, self.output_size):
            raise DimensionError(
                f"weights shape {self.weights.shape} != ({self.input_size}, {self.output_size})"
            )
        if self.bias.shape != (1, self.output_size):
            raise DimensionError(f"bias shape {self.bias.shape} != (1, {self.output_size})")


@dataclass(frozen=True)
class NeuronId:
    """(layer, index): 0-based layer position and neuron position within it."""

    layer: int
    index: int


@dataclass
class ActivationTrace:
    """Post-activation value of every neuron for one input, layer by layer."""

    input_id: str
    layers: list  # list of (width,) float32 arrays

    def __eq__(self, other) -> bool:
        if not isinstance(other, ActivationTrace):
            return NotImplemented
        return (
            self.input_id == other.input_id
            and len(self.layers) == len(other.layers)
            and all(np.array_equal(a, b) for a, b in zip(self.layers, other.layers))
        )


class Model:
    """Ordered dense layers; identity is a content hash of architecture + weights."""

    def __init__(self, layers: list):
        if not layers:
            raise ArgumentError("a model needs at least one layer")
        for prev, cur in zip(layers, layers[1:]):
            if prev.output_size != cur.input_size:
                raise DimensionError(
                    f"layer sizes do not chain: {prev.output_size} -> {cur.input_size}"
                )
        self.layers = layers
        self.input_size = layers[0].input_size
        self.num_classes = layers[-1].output_size
        self._model_id = None

    @property
    def layer_sizes(self) -> list:
        return [layer.output_size for layer in self.layers]

    @property
    def num_neurons(self) -> int:
        return sum(self.layer_sizes)

    @property
    def model_id(self) -> str:
        if self._model_id is None:
            self._model_id = fnv1a64_hex(canonical_model_bytes(self))
        return self._model_id

    def copy(self) -> "Model":
        layers = [
            LayerSpec(
                l.input_size,
                l.output_size,
                l.activation,
                Tensor(l.weights.shape, l.weights.data.copy()),
                Tensor(l.bias.shape, l.bias.data.copy()),
            )
            for l in self.layers
        ]
        return Model(layers)


def canonical_model_bytes(model: Model) -> bytes:
    """Stable byte serialization hashed into model_id (layout in FORMATS.md)."""
    out = [b"nncov-model-v1\x00"]
    out.append(struct.pack("<III", model.input_size, model.num_classes, len(model.layers)))
    for layer in model.layers:
        out.append(layer.kind.encode() + b"\x00")
        out.append(struct.pack("<II", layer.input_size, layer.output_size))
        out.append(layer.activation.encode() + b"\x00")
        out.append(layer.weights.data.astype("<f4").tobytes())
        out.append(layer.bias.data.astype("<f4").tobytes())
    return b"".join(out)


def _apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, np.float32(0.0))
    if name == "sigmoid":
        return (1.0 / (1.0 + np.exp(-z.astype(np.float64)))).astype(np.float32)
    return z


def build_mlp(layer_sizes: list, activation: str = "relu", seed: int = 0) -> Model:
    """MLP with the given sizes (input first), hidden `activation`, identity output.

    Weights are uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)) drawn from
    SplitMix64(seed) in row-major order; biases start at zero.
    """
    if len(layer_sizes) < 2:
        raise ArgumentError("layer_sizes needs an input and an output size")
    rng = SplitMix64(seed)
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(layer_sizes, layer_sizes[1:])):
        scale = np.sqrt(6.0 / (fan_in + fan_out))
        flat = np.array(
            [rng.uniform(-scale, scale) for _ in range(fan_in * fan_out)], dtype=np.float32
        )
        act = "identity" if i == len(layer_sizes) - 2 else activation
        layers.append(
            LayerSpec(fan_in, fan_out, act, Tensor((fan_in, fan_out), flat), Tensor.zeros(1, fan_out))
        )
    return Model(layers)


def _check_input(model: Model, x: Tensor) -> None:
    if x.shape != (1, model.input_size):
        raise DimensionError(f"input shape {x.shape} != (1, {model.input_size})")


def forward(model: Model, x: Tensor, input_id: str = "") -> tuple:
    """Run the network, returning (trace of every neuron, logits tensor).

    Logits are the final layer's post-activation values, i.e. what would
    feed softmax; with the conventional identity output layer they equal
    the pre-softmax scores.
    """
    _check_input(model, x)
    a = x.array
    recorded = []
    for layer in model.layers:
        z = (a.astype(np.float64) @ layer.weights.array.astype(np.float64)).astype(np.float32)
        z = z + layer.bias.array
        a = _apply_activation(layer.activation, z)
        recorded.append(a.reshape(-1).copy())
    trace = ActivationTrace(input_id, recorded)
    return trace, Tensor.row(recorded[-1])


def predict(model: Model, x: Tensor) -> int:
    """Class index: argmax of the logits, ties to the lowest index."""
    _, logits = forward(model, x)
    return int(np.argmax(logits.data))


def _forward_full(model: Model, x: Tensor):
    """Forward pass keeping pre- and post-activation values for backprop."""
    a = x.array
    pre, post = [], []
    for layer in model.layers:
        z = (a.astype(np.float64) @ layer.weights.array.astype(np.float64)).astype(np.float32)
        z = z + layer.bias.array
        a = _apply_activation(layer.activation, z)
        pre.append(z)
        post.append(a)
    return pre, post


def _loss_and_grads64(model: Model, x: Tensor, label: int):
    """Softmax cross-entropy loss and exact float64 gradients."""
    _check_input(model, x)
    if not 0 <= label < model.num_classes:
        raise ArgumentError(f"label {label} out of range [0, {model.num_classes})")
    pre, post = _forward_full(model, x)
    logits = post[-1].reshape(-1).astype(np.float64)
    peak = logits.max()
    lse = peak + np.log(np.exp(logits - peak).sum())
    loss = lse - logits[label]
    probs = np.exp(logits - lse)

    delta = probs.reshape(1, -1)
    delta[0, label] -= 1.0  # dL/d(last post-activation)
    weight_grads, bias_grads = [None] * len(model.layers), [None] * len(model.layers)
    for i in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[i]
        if layer.activation == "relu":
            dz = delta * (pre[i].astype(np.float64) > 0.0)
        elif layer.activation == "sigmoid":
            s = post[i].astype(np.float64)
            dz = delta * s * (1.0 - s)
        else:
            dz = delta
        below = x.array if i == 0 else post[i - 1]
        weight_grads[i] = below.astype(np.float64).T @ dz
        bias_grads[i] = dz.copy()
        delta = dz @ layer.weights.array.astype(np.float64).T
    return float(loss), weight_grads, bias_grads, delta


def loss_and_gradients(model: Model, x: Tensor, label: int) -> tuple:
    """Return (loss, [(dW, db) per layer], input gradient), all float32 tensors."""
    loss, wg, bg, input_grad = _loss_and_grads64(model, x, label)
    grads = [
        (Tensor.from_array(w.astype(np.float32)), Tensor.from_array(b.astype(np.float32)))
        for w, b in zip(wg, bg)
    ]
    return loss, grads, Tensor.from_array(input_grad.astype(np.float32))


def dataset_loss(model: Model, dataset: Dataset) -> float:
    """Mean cross-entropy over a dataset (no parameter updates)."""
    total = 0.0
    for i in range(len(dataset)):
        loss, _, _, _ = _loss_and_grads64(model, Tensor.row(dataset.inputs[i]), int(dataset.labels[i]))
        total += loss
    return total / len(dataset)


def dataset_accuracy(model: Model, dataset: Dataset) -> float:
    correct = sum(
        predict(model, Tensor.row(dataset.inputs[i])) == int(dataset.labels[i])
        for i in range(len(dataset))
    )
    return correct / len(dataset)


@dataclass
class TrainResult:
    model: Model
    final_accuracy: float
    epoch_losses: list = field(default_factory=list)


def train_sgd(
    model: Model,
    dataset: Dataset,
    epochs: int,
    lr: float,
    batch_size: int = 32,
    seed: int = 0,
) -> TrainResult:
    """Plain mini-batch SGD; deterministic given the seed (SplitMix64 shuffles).

    Returns the trained copy plus the final training accuracy; the input
    model is left untouched.
    """
    if len(dataset) == 0:
        raise ArgumentError("cannot train on an empty dataset")
    if dataset.input_size != model.input_size:
        raise DimensionError(
            f"dataset input_size {dataset.input_size} != model input_size {model.input_size}"
        )
    if lr < 0:
        raise ArgumentError("learning rate must be >= 0")
    if batch_size < 1:
        raise ArgumentError("batch_size must be >= 1")

    trained = model.copy()
    rng = SplitMix64(seed)
    order = list(range(len(dataset)))
    losses = []
    for _ in range(epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), batch_size):
            batch = order[start : start + batch_size]
            acc_w = [np.zeros((l.input_size, l.output_size)) for l in trained.layers]
            acc_b = [np.zeros((1, l.output_size)) for l in trained.layers]
            for idx in batch:
                loss, wg, bg, _ = _loss_and_grads64(
                    trained, Tensor.row(dataset.inputs[idx]), int(dataset.labels[idx])
                )
                epoch_loss += loss
                for i in range(len(acc_w)):
                    acc_w[i] += wg[i]
                    acc_b[i] += bg[i]
            scale = lr / len(batch)
            for i, layer in enumerate(trained.layers):
                new_w = layer.weights.array - (scale * acc_w[i]).astype(np.float32)
                new_b = layer.bias.array - (scale * acc_b[i]).astype(np.float32)
                trained.layers[i] = LayerSpec(
                    layer.input_size,
                    layer.output_size,
                    layer.activation,
                    Tensor.from_array(new_w),
                    Tensor.from_array(new_b),
                )
        trained._model_id = None
        losses.append(epoch_loss / len(order))
    return TrainResult(trained, dataset_accuracy(trained, dataset), losses)
