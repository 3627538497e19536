"""Coverage states form a merge monoid, so suites can be sharded across
workers and combined afterwards; every artifact also round-trips through
its file format bit-exactly.
"""

import os
import tempfile

import nncov
from nncov import CoverageConfig, traceio

data = nncov.make_synthetic_dataset("moons", 240, seed=11)
model = nncov.train_sgd(nncov.build_mlp([2, 12, 2], seed=3), data, epochs=30, lr=0.5, seed=4).model
profile = nncov.profile(model, data)
config = CoverageConfig(k_sections=200)


def covered(indices):
    state = nncov.new_state(model, profile, config)
    for i in indices:
        trace, _ = nncov.forward(model, nncov.Tensor.row(data.inputs[i]), data.ids[i])
        state.update(trace)
    return state


whole = covered(range(len(data)))
shards = [covered(range(s, len(data), 4)) for s in range(4)]
merged = shards[0]
for shard in shards[1:]:
    merged = nncov.merge(merged, shard)
assert merged == whole
print("4 shards merged == single pass:", merged.report().ratios() == whole.report().ratios())

with tempfile.TemporaryDirectory() as tmp:
    model_path = os.path.join(tmp, "model.json")
    state_path = os.path.join(tmp, "state.bin")
    traceio.write_model(model_path, model)
    traceio.write_state(state_path, whole)
    print("model round-trips:", traceio.read_model(model_path).model_id == model.model_id)
    print("state round-trips:", traceio.read_state(state_path) == whole)

    # the same pipeline is available from the shell:
    #   nncov gen-data --kind moons --n 240 --seed 11 --out data.bin
    #   nncov train   --data data.bin --layers 2,12,2 --out model.json
    #   nncov profile --model model.json --data data.bin --out profile.json
    #   nncov cover   --model model.json --profile profile.json \
    #                 --data data.bin --shards 4 --out report.json
    print("see --help on the nncov command for the CLI version of all of this")
