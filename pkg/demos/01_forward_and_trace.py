"""Build a tiny dense network and look at what the instrumented forward
pass records: one post-activation scalar per neuron, layer by layer."""

import numpy as np

import nncov

# a 2 -> 4 -> 3 MLP with relu hidden units and an identity output layer
model = nncov.build_mlp([2, 4, 3], activation="relu", seed=42)
print(f"model {model.model_id}: sizes {[model.input_size] + model.layer_sizes}")

x = nncov.Tensor.row([0.3, 0.8])
trace, logits = nncov.forward(model, x, input_id="demo-input")

for j, values in enumerate(trace.layers):
    print(f"layer {j} ({model.layers[j].activation}): {np.round(values, 4)}")
print("logits:", np.round(logits.array, 4))
print("predicted class:", nncov.predict(model, x))

# the forward pass is pure: identical inputs give bit-identical traces
again, _ = nncov.forward(model, x, input_id="demo-input")
assert trace == again
print("determinism check: identical trace on rerun")
