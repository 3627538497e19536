"""Profile a trained model's activation bounds, then measure how much of
each neuron's behavior a test suite actually exercises.

The profile's [low, high] interval per neuron is its major-function
region; k-multisection coverage (kmnc) asks how many of the k equal
slices of that interval the suite reached, while nbc/snac ask whether the
suite ever pushed a neuron strictly outside its training bounds.
"""

import nncov
from nncov import CoverageConfig, NeuronId

data = nncov.make_synthetic_dataset("blobs", 300, seed=7)
result = nncov.train_sgd(nncov.build_mlp([2, 8, 8, 2], seed=1), data, epochs=30, lr=0.5, seed=2)
model = result.model

profile = nncov.profile(model, data)
print("neuron (0,0) bounds:", profile.bounds(NeuronId(0, 0)))
print("region of value 0.0 with k=10:", nncov.region_of(profile, NeuronId(0, 0), 0.0, 10))

config = CoverageConfig(k_sections=100, top_k=1, nc_threshold=0.75)
state = nncov.new_state(model, profile, config)
for i in range(len(data)):
    trace, _ = nncov.forward(model, nncov.Tensor.row(data.inputs[i]), data.ids[i])
    state.update(trace)

report = state.report()
print(f"\ncoverage of the training suite itself ({report.inputs_seen} inputs):")
for criterion, value in report.ratios().items():
    print(f"  {criterion:5s} {value}")
print("nbc and snac are exactly 0 here: training data cannot leave its own bounds")
