"""In-memory labelled dataset plus seeded synthetic generators.

The synthetic sets (Gaussian blobs, two moons) stand in for real image
data at desk scale; they are generated from SplitMix64 + Box-Muller so a
given (kind, n, seed) triple yields bit-identical containers everywhere.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError
from .rng import SplitMix64

BLOB_CENTERS = ((0.25, 0.25), (0.75, 0.75))
BLOB_SIGMA = 0.08
MOON_NOISE = 0.05


@dataclass
class Dataset:
    """Row-per-sample inputs with integer labels and opaque per-input ids."""

    inputs: np.ndarray  # (n, input_size) float32
    labels: np.ndarray  # (n,) uint32
    num_classes: int
    ids: list = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = np.ascontiguousarray(self.inputs, dtype=np.float32)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint32)
        if self.inputs.ndim != 2:
            raise ArgumentError(f"inputs must be 2-D, got shape {self.inputs.shape}")
        if self.labels.shape != (self.inputs.shape[0],):
            raise ArgumentError("one label per input row required")
        if self.num_classes < 1:
            raise ArgumentError("num_classes must be >= 1")
        if self.labels.size and int(self.labels.max()) >= self.num_classes:
            raise ArgumentError(
                f"label {int(self.labels.max())} out of range for {self.num_classes} classes"
            )
        if self.ids is None:
            self.ids = [str(i) for i in range(len(self))]
        if len(self.ids) != len(self):
            raise ArgumentError("one id per input row required")

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def input_size(self) -> int:
        return self.inputs.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = list(indices)
        return Dataset(
            self.inputs[idx],
            self.labels[idx],
            self.num_classes,
            ids=[self.ids[i] for i in idx],
            provenance=dict(self.provenance),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.num_classes == other.num_classes
            and self.ids == other.ids
            and self.provenance == other.provenance
            and np.array_equal(self.inputs, other.inputs)
            and np.array_equal(self.labels, other.labels)
        )


def concat_datasets(parts: list) -> "Dataset":
    """Concatenate suites that share input_size and num_classes, order preserved."""
    if not parts:
        raise ArgumentError("no datasets to concatenate")
    first = parts[0]
    for d in parts[1:]:
        if d.input_size != first.input_size or d.num_classes != first.num_classes:
            raise ArgumentError("datasets disagree on input_size/num_classes")
    ids = [i for d in parts for i in d.ids]
    return Dataset(
        np.concatenate([d.inputs for d in parts]),
        np.concatenate([d.labels for d in parts]),
        first.num_classes,
        ids=ids,
        provenance={"kind": "concat", "parts": [d.provenance for d in parts]},
    )


def make_synthetic_dataset(kind: str, n: int, seed: int) -> Dataset:
    """Deterministic 2-D two-class dataset, inputs in [0, 1]^2, balanced labels.

    kind "blobs": Gaussian clusters at (0.25, 0.25) / (0.75, 0.75), sigma 0.08.
    kind "moons": two interleaved half-circles with Gaussian jitter.
    """
    if n < 2:
        raise ArgumentError(f"need at least 2 samples, got {n}")
    rng = SplitMix64(seed)
    points = np.zeros((n, 2), dtype=np.float64)
    labels = np.zeros(n, dtype=np.uint32)
    if kind == "blobs":
        for i in range(n):
            label = i % 2
            cx, cy = BLOB_CENTERS[label]
            points[i, 0] = cx + BLOB_SIGMA * rng.normal()
            points[i, 1] = cy + BLOB_SIGMA * rng.normal()
            labels[i] = label
    elif kind == "moons":
        for i in range(n):
            label = i % 2
            t = rng.uniform(0.0, np.pi)
            if label == 0:
                x, y = np.cos(t), np.sin(t)
            else:
                x, y = 1.0 - np.cos(t), 0.5 - np.sin(t)
            x += MOON_NOISE * rng.normal()
            y += MOON_NOISE * rng.normal()
            # canonical moons live in [-1, 2] x [-0.5, 1]; map into the unit square
            points[i, 0] = (x + 1.0) / 3.0
            points[i, 1] = (y + 0.5) / 1.5
            labels[i] = label
    else:
        raise ArgumentError(f"unknown synthetic kind {kind!r}")
    np.clip(points, 0.0, 1.0, out=points)
    return Dataset(
        points.astype(np.float32),
        labels,
        num_classes=2,
        provenance={"kind": kind, "n": n, "seed": seed},
    )
