import numpy as np
import pytest

import nncov


def random_model(rng: np.random.Generator, min_width=4, max_width=16):
    """2-3 layer MLP (hidden and output widths in [min_width, max_width])
    with random activation and init seed."""
    depth = int(rng.integers(2, 4))
    sizes = [int(rng.integers(2, 6))] + [
        int(rng.integers(min_width, max_width + 1)) for _ in range(depth)
    ]
    activation = rng.choice(["relu", "sigmoid"])
    return nncov.build_mlp(sizes, activation=str(activation), seed=int(rng.integers(0, 2**31)))


def random_suite(rng: np.random.Generator, model, count, spread=1.0):
    """Random inputs around [0,1] with a few pushed well outside it so
    corner regions actually get exercised."""
    inputs = rng.uniform(-0.2, 1.2, size=(count, model.input_size))
    wild = rng.random(count) < 0.25
    inputs[wild] *= spread * 4.0
    return inputs.astype(np.float32)


def traces_for(model, inputs):
    out = []
    for i in range(inputs.shape[0]):
        trace, _ = nncov.forward(model, nncov.Tensor.row(inputs[i]), str(i))
        out.append(trace)
    return out


def profile_from_random_training(rng, model, count=40):
    train = rng.uniform(0.0, 1.0, size=(count, model.input_size)).astype(np.float32)
    labels = (np.arange(count) % model.num_classes).astype(np.uint32)
    ds = nncov.Dataset(train, labels, model.num_classes)
    return nncov.profile(model, ds), ds


@pytest.fixture
def blob_setup():
    """Small trained blob model with its training data and profile."""
    data = nncov.make_synthetic_dataset("blobs", 80, seed=7)
    result = nncov.train_sgd(
        nncov.build_mlp([2, 8, 8, 2], seed=1), data, epochs=25, lr=0.5, batch_size=8, seed=2
    )
    prof = nncov.profile(result.model, data)
    return result.model, data, prof
