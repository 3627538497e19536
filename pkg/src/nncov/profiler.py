"""Per-neuron activation bounds from training data, and region lookup.

The profile's [low, high] interval is each neuron's major-function region;
values strictly outside it fall in the corner regions.  Values exactly at
a bound belong to the outermost section, so profiling data can never land
in its own corners.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ArgumentError, DataError, UnknownNeuronError
from .model import Model, NeuronId, forward
from .rng import fnv1a64_hex
from .tensor import Tensor

LOWER_CORNER = "lower_corner"
SECTION = "section"
UPPER_CORNER = "upper_corner"


@dataclass(frozen=True)
class Region:
    """Where a value sits relative to a neuron's training bounds."""

    kind: str
    section: int = None

    @classmethod
    def lower_corner(cls) -> "Region":
        return cls(LOWER_CORNER)

    @classmethod
    def upper_corner(cls) -> "Region":
        return cls(UPPER_CORNER)

    @classmethod
    def section_at(cls, i: int) -> "Region":
        return cls(SECTION, i)

    def order_key(self, k: int) -> int:
        """LowerCorner < Section(0) < ... < Section(k-1) < UpperCorner."""
        if self.kind == LOWER_CORNER:
            return -1
        if self.kind == UPPER_CORNER:
            return k
        return self.section


@dataclass
class NeuronProfile:
    """Training-set activation bounds per neuron, plus count/mean/std diagnostics."""

    model_id: str
    lows: list  # per layer: (width,) float32
    highs: list  # per layer: (width,) float32
    count: int = 0
    means: list = None  # per layer: (width,) float64, optional
    stds: list = None

    def __post_init__(self):
        for low, high in zip(self.lows, self.highs):
            if low.shape != high.shape:
                raise ArgumentError("low/high arrays disagree in shape")
            if np.any(low > high):
                raise ArgumentError("profile has low > high")

    @property
    def layer_sizes(self) -> list:
        return [low.size for low in self.lows]

    @property
    def num_neurons(self) -> int:
        return sum(self.layer_sizes)

    @property
    def profile_hash(self) -> str:
        return fnv1a64_hex(canonical_profile_bytes(self))

    def bounds(self, neuron: NeuronId) -> tuple:
        self._check_neuron(neuron)
        return (
            float(self.lows[neuron.layer][neuron.index]),
            float(self.highs[neuron.layer][neuron.index]),
        )

    def _check_neuron(self, neuron: NeuronId) -> None:
        if not 0 <= neuron.layer < len(self.lows):
            raise UnknownNeuronError(f"layer {neuron.layer} not in profile")
        if not 0 <= neuron.index < self.lows[neuron.layer].size:
            raise UnknownNeuronError(
                f"neuron {neuron.index} not in layer {neuron.layer} "
                f"(width {self.lows[neuron.layer].size})"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, NeuronProfile):
            return NotImplemented
        same_bounds = (
            self.model_id == other.model_id
            and self.count == other.count
            and len(self.lows) == len(other.lows)
            and all(np.array_equal(a, b) for a, b in zip(self.lows, other.lows))
            and all(np.array_equal(a, b) for a, b in zip(self.highs, other.highs))
        )
        if not same_bounds:
            return False
        for mine, theirs in ((self.means, other.means), (self.stds, other.stds)):
            if (mine is None) != (theirs is None):
                return False
            if mine is not None and not all(np.array_equal(a, b) for a, b in zip(mine, theirs)):
                return False
        return True


def canonical_profile_bytes(profile: NeuronProfile) -> bytes:
    out = [b"nncov-profile-v1\x00", profile.model_id.encode() + b"\x00"]
    out.append(struct.pack("<I", len(profile.lows)))
    for low, high in zip(profile.lows, profile.highs):
        out.append(struct.pack("<I", low.size))
        out.append(low.astype("<f4").tobytes())
        out.append(high.astype("<f4").tobytes())
    return b"".join(out)


def profile(model: Model, training_set: Dataset) -> NeuronProfile:
    """Observed min/max activation of every neuron over the training set."""
    if len(training_set) == 0:
        raise ArgumentError("cannot profile from an empty training set")
    sizes = model.layer_sizes
    lows = [np.full(w, np.inf, dtype=np.float32) for w in sizes]
    highs = [np.full(w, -np.inf, dtype=np.float32) for w in sizes]
    sums = [np.zeros(w) for w in sizes]
    sq_sums = [np.zeros(w) for w in sizes]
    for i in range(len(training_set)):
        trace, _ = forward(model, Tensor.row(training_set.inputs[i]), training_set.ids[i])
        for j, values in enumerate(trace.layers):
            np.minimum(lows[j], values, out=lows[j])
            np.maximum(highs[j], values, out=highs[j])
            sums[j] += values
            sq_sums[j] += values.astype(np.float64) ** 2
    n = len(training_set)
    means = [s / n for s in sums]
    stds = [np.sqrt(np.maximum(sq / n - m**2, 0.0)) for sq, m in zip(sq_sums, means)]
    return NeuronProfile(model.model_id, lows, highs, count=n, means=means, stds=stds)


def region_of(profile: NeuronProfile, neuron: NeuronId, value: float, k: int) -> Region:
    """Map a value to LowerCorner, Section(0..k-1), or UpperCorner.

    Corners are strict (value must exceed the bound); value == high maps to
    Section(k-1), and a degenerate low == high neuron has a single section
    at the point.
    """
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if not math.isfinite(value):
        raise DataError(f"non-finite value for neuron {neuron}")
    low, high = profile.bounds(neuron)
    if value < low:
        return Region.lower_corner()
    if value > high:
        return Region.upper_corner()
    if high == low:
        return Region.section_at(0)
    width = (high - low) / k
    section = int(math.floor((value - low) / width))
    return Region.section_at(min(max(section, 0), k - 1))


def section_codes(low: np.ndarray, high: np.ndarray, values: np.ndarray, k: int) -> np.ndarray:
    """Vectorized region_of over one layer: -1 lower corner, 0..k-1 section, k upper.

    Implements exactly the scalar rules above (same float64 expressions), so
    the two paths can never disagree.
    """
    v = values.astype(np.float64)
    lo = low.astype(np.float64)
    hi = high.astype(np.float64)
    lower = v < lo
    upper = v > hi
    degenerate = hi == lo
    width = (hi - lo) / k
    safe_width = np.where(degenerate, 1.0, width)
    section = np.floor((v - lo) / safe_width)
    section = np.where(degenerate, 0.0, section)
    section = np.clip(section, 0, k - 1).astype(np.int64)
    return np.where(lower, -1, np.where(upper, k, section))
