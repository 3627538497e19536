"""Train a small classifier on the seeded synthetic blob data.

Everything is driven by SplitMix64 seeds, so this script prints the same
numbers on every machine.
"""

import nncov

data = nncov.make_synthetic_dataset("blobs", 400, seed=7)
print(f"dataset: {len(data)} samples in [0,1]^2, labels balanced")
print("first three points:", data.inputs[:3].round(3).tolist(), data.labels[:3].tolist())

model = nncov.build_mlp([2, 16, 16, 2], activation="relu", seed=1)
print("initial loss:", round(nncov.dataset_loss(model, data), 4))

result = nncov.train_sgd(model, data, epochs=40, lr=0.5, batch_size=16, seed=2)
for epoch, loss in enumerate(result.epoch_losses[::8]):
    print(f"epoch {epoch * 8:3d}: mean loss {loss:.4f}")
print("final training accuracy:", result.final_accuracy)
print("trained model id:", result.model.model_id)
