"""Incremental, mergeable accumulation of the five multi-granularity
coverage criteria plus the threshold-based neuron-coverage baseline.

A CoverageState is a monotone accumulator: flags and section bits only
flip false -> true and the pattern set only grows, so updating with a
suite in any order (or sharding and merging) yields the same final state.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, BindingError, DataError, MergeError, TraceError
from .model import ActivationTrace, Model
from .profiler import NeuronProfile, section_codes

CRITERIA = ("kmnc", "nbc", "snac", "tknc", "tknp", "nc")


@dataclass(frozen=True)
class CoverageConfig:
    """k_sections: sections per neuron; top_k: size of per-layer top set;
    nc_threshold: scaled-activation threshold of the baseline criterion."""

    k_sections: int = 1000
    top_k: int = 1
    nc_threshold: float = 0.75

    def __post_init__(self):
        if self.k_sections < 1:
            raise ArgumentError(f"k_sections must be >= 1, got {self.k_sections}")
        if self.top_k < 1:
            raise ArgumentError(f"top_k must be >= 1, got {self.top_k}")
        if not 0.0 <= self.nc_threshold <= 1.0:
            raise ArgumentError(f"nc_threshold must be in [0, 1], got {self.nc_threshold}")

    def to_dict(self) -> dict:
        return {
            "k_sections": self.k_sections,
            "top_k": self.top_k,
            "nc_threshold": self.nc_threshold,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoverageConfig":
        return cls(int(d["k_sections"]), int(d["top_k"]), float(d["nc_threshold"]))


def encode_pattern(topk_per_layer: list) -> bytes:
    """Canonical byte encoding of one input's per-layer top-k index sets.

    Each layer contributes a little-endian u32 count followed by the
    indices sorted ascending, so the encoding is independent of the order
    in which the top-k indices were found.
    """
    parts = []
    for indices in topk_per_layer:
        ordered = sorted(int(i) for i in indices)
        parts.append(struct.pack("<I", len(ordered)))
        parts.append(np.asarray(ordered, dtype="<u4").tobytes())
    return b"".join(parts)


class CoverageState:
    """Mergeable per-neuron coverage accumulator bound to one
    (model, profile, config) triple."""

    def __init__(self, model_id: str, profile_hash: str, config: CoverageConfig,
                 layer_sizes: list, profile: NeuronProfile = None):
        self.model_id = model_id
        self.profile_hash = profile_hash
        self.config = config
        self.layer_sizes = list(layer_sizes)
        self.profile = profile  # needed by update(); not part of identity
        k = config.k_sections
        self.sections = [np.zeros((w, k), dtype=bool) for w in self.layer_sizes]
        self.upper = [np.zeros(w, dtype=bool) for w in self.layer_sizes]
        self.lower = [np.zeros(w, dtype=bool) for w in self.layer_sizes]
        self.topk = [np.zeros(w, dtype=bool) for w in self.layer_sizes]
        self.nc = [np.zeros(w, dtype=bool) for w in self.layer_sizes]
        self.pattern_set = set()
        self.inputs_seen = 0

    @property
    def num_neurons(self) -> int:
        return sum(self.layer_sizes)

    def bindings(self) -> tuple:
        return (self.model_id, self.profile_hash, self.config, tuple(self.layer_sizes))

    def update(self, trace: ActivationTrace) -> None:
        """Fold one activation trace into the accumulator."""
        if self.profile is None:
            raise BindingError("state has no profile attached; cannot classify activations")
        if len(trace.layers) != len(self.layer_sizes):
            raise TraceError(
                f"trace has {len(trace.layers)} layers, model has {len(self.layer_sizes)}"
            )
        for j, values in enumerate(trace.layers):
            if values.shape != (self.layer_sizes[j],):
                raise TraceError(
                    f"trace layer {j} has {values.shape[0]} values, expected {self.layer_sizes[j]}"
                )
            bad = np.flatnonzero(~np.isfinite(values))
            if bad.size:
                raise DataError(
                    f"non-finite activation at layer {j}, neuron {int(bad[0])}"
                    f" (input {trace.input_id!r})"
                )

        k = self.config.k_sections
        topk_per_layer = []
        for j, values in enumerate(trace.layers):
            codes = section_codes(self.profile.lows[j], self.profile.highs[j], values, k)
            self.lower[j] |= codes == -1
            self.upper[j] |= codes == k
            in_range = (codes >= 0) & (codes < k)
            self.sections[j][np.flatnonzero(in_range), codes[in_range]] = True

            vmin = float(values.min())
            vmax = float(values.max())
            if vmax > vmin:
                scaled = (values.astype(np.float64) - vmin) / (vmax - vmin)
            else:
                scaled = np.zeros_like(values, dtype=np.float64)
            self.nc[j] |= scaled > self.config.nc_threshold

            top = np.argsort(-values, kind="stable")[: self.config.top_k]
            self.topk[j][top] = True
            topk_per_layer.append(top)
        self.pattern_set.add(encode_pattern(topk_per_layer))
        self.inputs_seen += 1

    def merge(self, other: "CoverageState") -> "CoverageState":
        """Pointwise OR / set union of two states with identical bindings."""
        if self.bindings() != other.bindings():
            raise MergeError(
                f"cannot merge states bound to {self.bindings()} and {other.bindings()}"
            )
        merged = CoverageState(
            self.model_id, self.profile_hash, self.config, self.layer_sizes,
            profile=self.profile if self.profile is not None else other.profile,
        )
        for j in range(len(self.layer_sizes)):
            merged.sections[j] = self.sections[j] | other.sections[j]
            merged.upper[j] = self.upper[j] | other.upper[j]
            merged.lower[j] = self.lower[j] | other.lower[j]
            merged.topk[j] = self.topk[j] | other.topk[j]
            merged.nc[j] = self.nc[j] | other.nc[j]
        merged.pattern_set = self.pattern_set | other.pattern_set
        merged.inputs_seen = self.inputs_seen + other.inputs_seen
        return merged

    def report(self) -> "CoverageReport":
        """Criterion ratios and raw counts, all recomputable from the state."""
        n = self.num_neurons
        k = self.config.k_sections
        sections_covered = int(sum(a.sum() for a in self.sections))
        upper_neurons = int(sum(a.sum() for a in self.upper))
        lower_neurons = int(sum(a.sum() for a in self.lower))
        topk_neurons = int(sum(a.sum() for a in self.topk))
        nc_neurons = int(sum(a.sum() for a in self.nc))
        return CoverageReport(
            model_id=self.model_id,
            profile_hash=self.profile_hash,
            config=self.config,
            inputs_seen=self.inputs_seen,
            kmnc=sections_covered / (k * n),
            nbc=(upper_neurons + lower_neurons) / (2 * n),
            snac=upper_neurons / n,
            tknc=topk_neurons / n,
            nc=nc_neurons / n,
            tknp=len(self.pattern_set),
            sections_covered=sections_covered,
            upper_corner_neurons=upper_neurons,
            lower_corner_neurons=lower_neurons,
            topk_neurons=topk_neurons,
            nc_neurons=nc_neurons,
            neurons=n,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoverageState):
            return NotImplemented
        return (
            self.bindings() == other.bindings()
            and self.inputs_seen == other.inputs_seen
            and self.pattern_set == other.pattern_set
            and all(np.array_equal(a, b) for a, b in zip(self.sections, other.sections))
            and all(np.array_equal(a, b) for a, b in zip(self.upper, other.upper))
            and all(np.array_equal(a, b) for a, b in zip(self.lower, other.lower))
            and all(np.array_equal(a, b) for a, b in zip(self.topk, other.topk))
            and all(np.array_equal(a, b) for a, b in zip(self.nc, other.nc))
        )


def new_state(model: Model, profile: NeuronProfile, config: CoverageConfig) -> CoverageState:
    """Empty accumulator bound to the model/profile/config triple."""
    if profile.model_id != model.model_id:
        raise BindingError(
            f"profile was built from model {profile.model_id}, not {model.model_id}"
        )
    if profile.layer_sizes != model.layer_sizes:
        raise BindingError(
            f"profile layer sizes {profile.layer_sizes} != model {model.layer_sizes}"
        )
    if config.top_k > min(model.layer_sizes):
        raise BindingError(
            f"top_k {config.top_k} exceeds smallest layer width {min(model.layer_sizes)}"
        )
    return CoverageState(
        model.model_id, profile.profile_hash, config, model.layer_sizes, profile=profile
    )


def merge(a: CoverageState, b: CoverageState) -> CoverageState:
    return a.merge(b)


@dataclass(frozen=True)
class CoverageReport:
    model_id: str
    profile_hash: str
    config: CoverageConfig
    inputs_seen: int
    kmnc: float
    nbc: float
    snac: float
    tknc: float
    nc: float
    tknp: int
    sections_covered: int
    upper_corner_neurons: int
    lower_corner_neurons: int
    topk_neurons: int
    nc_neurons: int
    neurons: int

    def ratios(self) -> dict:
        return {
            "kmnc": self.kmnc,
            "nbc": self.nbc,
            "snac": self.snac,
            "tknc": self.tknc,
            "tknp": self.tknp,
            "nc": self.nc,
        }

    def to_dict(self) -> dict:
        return {
            "format": "report",
            "version": 1,
            "model_id": self.model_id,
            "profile_hash": self.profile_hash,
            "config": self.config.to_dict(),
            "inputs_seen": self.inputs_seen,
            "kmnc": self.kmnc,
            "nbc": self.nbc,
            "snac": self.snac,
            "tknc": self.tknc,
            "nc": self.nc,
            "tknp": self.tknp,
            "counts": {
                "sections_covered": self.sections_covered,
                "upper_corner_neurons": self.upper_corner_neurons,
                "lower_corner_neurons": self.lower_corner_neurons,
                "topk_neurons": self.topk_neurons,
                "nc_neurons": self.nc_neurons,
                "neurons": self.neurons,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoverageReport":
        counts = d["counts"]
        return cls(
            model_id=d["model_id"],
            profile_hash=d["profile_hash"],
            config=CoverageConfig.from_dict(d["config"]),
            inputs_seen=int(d["inputs_seen"]),
            kmnc=float(d["kmnc"]),
            nbc=float(d["nbc"]),
            snac=float(d["snac"]),
            tknc=float(d["tknc"]),
            nc=float(d["nc"]),
            tknp=int(d["tknp"]),
            sections_covered=int(counts["sections_covered"]),
            upper_corner_neurons=int(counts["upper_corner_neurons"]),
            lower_corner_neurons=int(counts["lower_corner_neurons"]),
            topk_neurons=int(counts["topk_neurons"]),
            nc_neurons=int(counts["nc_neurons"]),
            neurons=int(counts["neurons"]),
        )


@dataclass(frozen=True)
class CoverageDelta:
    """Per-criterion differences: extended suite minus base suite."""

    kmnc: float
    nbc: float
    snac: float
    tknc: float
    nc: float
    tknp: int
    inputs_seen: int

    def to_dict(self) -> dict:
        return {
            "kmnc": self.kmnc,
            "nbc": self.nbc,
            "snac": self.snac,
            "tknc": self.tknc,
            "nc": self.nc,
            "tknp": self.tknp,
            "inputs_seen": self.inputs_seen,
        }


def diff(base: CoverageReport, extended: CoverageReport) -> CoverageDelta:
    """Criterion deltas between two reports with identical bindings."""
    if (base.model_id, base.profile_hash, base.config) != (
        extended.model_id,
        extended.profile_hash,
        extended.config,
    ):
        raise BindingError("reports are not comparable: model/profile/config bindings differ")
    return CoverageDelta(
        kmnc=extended.kmnc - base.kmnc,
        nbc=extended.nbc - base.nbc,
        snac=extended.snac - base.snac,
        tknc=extended.tknc - base.tknc,
        nc=extended.nc - base.nc,
        tknp=extended.tknp - base.tknp,
        inputs_seen=extended.inputs_seen - base.inputs_seen,
    )
