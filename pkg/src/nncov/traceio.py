"""Persistent formats: model, dataset, profile, trace stream, coverage
state, coverage report.

JSON for the small human-diffable artifacts (model, profile, report),
raw little-endian binary for the bulky ones (dataset, trace, state).
Byte layouts are documented in FORMATS.md; every writer is atomic
(temp file + rename) and every reader fails with a named error rather
than guessing.
"""

import json
import os
import struct

import numpy as np

from .coverage import CoverageConfig, CoverageReport, CoverageState
from .data import Dataset, make_synthetic_dataset  # noqa: F401  (re-export: dataset synthesis lives with the container format)
from .errors import (
    BadMagicError,
    BindingError,
    DataError,
    FormatError,
    HeaderMismatchError,
    TruncatedError,
    VersionMismatchError,
)
from .model import ActivationTrace, LayerSpec, Model
from .profiler import NeuronProfile
from .tensor import Tensor

DATASET_MAGIC = b"DGDS"
TRACE_MAGIC = b"DGTR"
STATE_MAGIC = b"DGCS"
FORMAT_VERSION = 1


def _atomic_write(path: str, payload: bytes) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(payload)
    os.replace(tmp, path)


def _dump_json(doc: dict) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()


def _load_json(path: str, expected_format: str) -> dict:
    with open(path, "rb") as f:
        raw = f.read()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"malformed JSON in {path}: {e}") from e
    if not isinstance(doc, dict) or doc.get("format") != expected_format:
        raise BadMagicError(
            f"{path}: expected a {expected_format!r} file, found {doc.get('format')!r}"
            if isinstance(doc, dict)
            else f"{path}: not a JSON object"
        )
    if doc.get("version") != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: unsupported version {doc.get('version')!r}")
    return doc


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise TruncatedError(f"file ends inside {what} ({len(data)}/{n} bytes)")
    return data


def _read_header(f, magic: bytes, path: str, versioned: bool) -> dict:
    found = f.read(len(magic))
    if found != magic:
        raise BadMagicError(f"{path}: bad magic {found!r}, expected {magic!r}")
    if versioned:
        (version,) = struct.unpack("<I", _read_exact(f, 4, "version field"))
        if version != FORMAT_VERSION:
            raise VersionMismatchError(f"{path}: unsupported version {version}")
    (header_len,) = struct.unpack("<I", _read_exact(f, 4, "header length"))
    raw = _read_exact(f, header_len, "header JSON")
    try:
        header = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"{path}: malformed header JSON: {e}") from e
    if not versioned:
        if header.get("version") != FORMAT_VERSION:
            raise VersionMismatchError(f"{path}: unsupported version {header.get('version')!r}")
    return header


# ---------------------------------------------------------------- model ----


def write_model(path: str, model: Model) -> None:
    doc = {
        "format": "model",
        "version": FORMAT_VERSION,
        "model_id": model.model_id,
        "input_size": model.input_size,
        "num_classes": model.num_classes,
        "layers": [
            {
                "kind": layer.kind,
                "input_size": layer.input_size,
                "output_size": layer.output_size,
                "activation": layer.activation,
                "weights": layer.weights.array.tolist(),
                "bias": layer.bias.array.reshape(-1).tolist(),
            }
            for layer in model.layers
        ],
    }
    _atomic_write(path, _dump_json(doc))


def read_model(path: str) -> Model:
    doc = _load_json(path, "model")
    layers = []
    for i, spec in enumerate(doc["layers"]):
        try:
            weights = np.asarray(spec["weights"], dtype=np.float32)
            bias = np.asarray(spec["bias"], dtype=np.float32)
        except ValueError as e:
            raise HeaderMismatchError(f"{path}: layer {i} has ragged parameters: {e}") from e
        if weights.shape != (spec["input_size"], spec["output_size"]):
            raise HeaderMismatchError(
                f"{path}: layer {i} weights shape {weights.shape} disagrees with "
                f"declared ({spec['input_size']}, {spec['output_size']})"
            )
        if bias.shape != (spec["output_size"],):
            raise HeaderMismatchError(
                f"{path}: layer {i} bias length {bias.shape} != {spec['output_size']}"
            )
        if not np.all(np.isfinite(weights)) or not np.all(np.isfinite(bias)):
            raise DataError(f"{path}: non-finite parameter in layer {i}")
        layers.append(
            LayerSpec(
                int(spec["input_size"]),
                int(spec["output_size"]),
                spec["activation"],
                Tensor.from_array(weights),
                Tensor.from_array(bias.reshape(1, -1)),
            )
        )
    model = Model(layers)
    if model.model_id != doc["model_id"]:
        raise HeaderMismatchError(
            f"{path}: stored model_id {doc['model_id']} does not match content "
            f"hash {model.model_id}"
        )
    if model.input_size != doc["input_size"] or model.num_classes != doc["num_classes"]:
        raise HeaderMismatchError(f"{path}: input_size/num_classes disagree with layers")
    return model


# -------------------------------------------------------------- profile ----


def write_profile(path: str, profile: NeuronProfile) -> None:
    doc = {
        "format": "profile",
        "version": FORMAT_VERSION,
        "model_id": profile.model_id,
        "count": profile.count,
        "layers": [
            [[float(lo), float(hi)] for lo, hi in zip(lows, highs)]
            for lows, highs in zip(profile.lows, profile.highs)
        ],
    }
    if profile.means is not None:
        doc["means"] = [m.tolist() for m in profile.means]
    if profile.stds is not None:
        doc["stds"] = [s.tolist() for s in profile.stds]
    _atomic_write(path, _dump_json(doc))


def read_profile(path: str) -> NeuronProfile:
    doc = _load_json(path, "profile")
    lows, highs = [], []
    for pairs in doc["layers"]:
        try:
            arr = np.asarray(pairs, dtype=np.float32)
        except ValueError as e:
            raise HeaderMismatchError(f"{path}: ragged profile layer: {e}") from e
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise HeaderMismatchError(f"{path}: profile layers must be [low, high] pairs")
        lows.append(np.ascontiguousarray(arr[:, 0]))
        highs.append(np.ascontiguousarray(arr[:, 1]))
    means = [np.asarray(m, dtype=np.float64) for m in doc["means"]] if "means" in doc else None
    stds = [np.asarray(s, dtype=np.float64) for s in doc["stds"]] if "stds" in doc else None
    return NeuronProfile(
        doc["model_id"], lows, highs, count=int(doc.get("count", 0)), means=means, stds=stds
    )


# --------------------------------------------------------------- report ----


def write_report(path: str, report: CoverageReport) -> None:
    _atomic_write(path, _dump_json(report.to_dict()))


def read_report(path: str) -> CoverageReport:
    doc = _load_json(path, "report")
    try:
        return CoverageReport.from_dict(doc)
    except (KeyError, TypeError, ValueError) as e:
        raise HeaderMismatchError(f"{path}: incomplete report: {e}") from e


# -------------------------------------------------------------- dataset ----


def write_dataset(path: str, dataset: Dataset) -> None:
    header = {
        "version": FORMAT_VERSION,
        "count": len(dataset),
        "input_size": dataset.input_size,
        "num_classes": dataset.num_classes,
        "provenance": dataset.provenance,
    }
    default_ids = [str(i) for i in range(len(dataset))]
    if dataset.ids != default_ids:
        header["input_ids"] = dataset.ids
    header_bytes = json.dumps(header, sort_keys=True).encode()
    payload = [
        DATASET_MAGIC,
        struct.pack("<I", len(header_bytes)),
        header_bytes,
        dataset.inputs.astype("<f4").tobytes(),
        dataset.labels.astype("<u4").tobytes(),
    ]
    _atomic_write(path, b"".join(payload))


def read_dataset(path: str) -> Dataset:
    with open(path, "rb") as f:
        header = _read_header(f, DATASET_MAGIC, path, versioned=False)
        count = int(header["count"])
        input_size = int(header["input_size"])
        num_classes = int(header["num_classes"])
        if count < 0 or input_size < 1 or num_classes < 1:
            raise HeaderMismatchError(
                f"{path}: nonsense header (count={count}, input_size={input_size}, "
                f"num_classes={num_classes})"
            )
        floats = _read_exact(f, count * input_size * 4, "input payload")
        labels_raw = _read_exact(f, count * 4, "label payload")
        trailing = f.read()
    if trailing:
        raise HeaderMismatchError(f"{path}: {len(trailing)} trailing bytes after payload")
    inputs = np.frombuffer(floats, dtype="<f4").reshape(count, input_size).copy()
    labels = np.frombuffer(labels_raw, dtype="<u4").copy()
    if labels.size and int(labels.max()) >= num_classes:
        raise DataError(
            f"{path}: label {int(labels.max())} out of range for {num_classes} classes"
        )
    ids = header.get("input_ids")
    if ids is not None and len(ids) != count:
        raise HeaderMismatchError(f"{path}: {len(ids)} input_ids for {count} records")
    return Dataset(
        inputs,
        labels,
        num_classes,
        ids=list(ids) if ids is not None else None,
        provenance=header.get("provenance", {}),
    )


# --------------------------------------------------------------- traces ----


def write_trace_stream(path: str, model_id: str, layer_sizes: list, records: list) -> None:
    """records: sequence of (input_id, [per-layer float32 arrays])."""
    header = {
        "model_id": model_id,
        "layer_sizes": [int(w) for w in layer_sizes],
        "count": len(records),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    chunks = [TRACE_MAGIC, struct.pack("<I", FORMAT_VERSION)]
    chunks.append(struct.pack("<I", len(header_bytes)))
    chunks.append(header_bytes)
    for input_id, layers in records:
        if [a.size for a in layers] != header["layer_sizes"]:
            raise HeaderMismatchError(
                f"record {input_id!r} layer sizes {[a.size for a in layers]} "
                f"disagree with header {header['layer_sizes']}"
            )
        encoded_id = str(input_id).encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded_id)))
        chunks.append(encoded_id)
        for arr in layers:
            chunks.append(np.asarray(arr, dtype="<f4").reshape(-1).tobytes())
    _atomic_write(path, b"".join(chunks))


def write_traces_for(model: Model, dataset: Dataset, path: str) -> None:
    """Forward every dataset input through the model and stream the traces out."""
    from .model import forward  # local import keeps module load cheap

    records = []
    for i in range(len(dataset)):
        trace, _ = forward(model, Tensor.row(dataset.inputs[i]), dataset.ids[i])
        records.append((trace.input_id, trace.layers))
    write_trace_stream(path, model.model_id, model.layer_sizes, records)


def read_trace_stream(path: str) -> tuple:
    """Return (header dict, list of ActivationTrace)."""
    with open(path, "rb") as f:
        header = _read_header(f, TRACE_MAGIC, path, versioned=True)
        layer_sizes = [int(w) for w in header["layer_sizes"]]
        count = int(header["count"])
        if count < 0 or not layer_sizes or any(w < 1 for w in layer_sizes):
            raise HeaderMismatchError(
                f"{path}: nonsense header (count={count}, layer_sizes={layer_sizes})"
            )
        record_floats = sum(layer_sizes)
        traces = []
        for r in range(count):
            try:
                (id_len,) = struct.unpack("<I", _read_exact(f, 4, "input_id length"))
                input_id = _read_exact(f, id_len, "input_id").decode("utf-8")
                raw = _read_exact(f, record_floats * 4, "activation payload")
            except TruncatedError as e:
                raise TruncatedError(f"{path}: truncated in record {r}: {e}") from e
            flat = np.frombuffer(raw, dtype="<f4")
            layers, offset = [], 0
            for w in layer_sizes:
                layers.append(flat[offset : offset + w].copy())
                offset += w
            traces.append(ActivationTrace(input_id, layers))
        trailing = f.read()
    if trailing:
        raise HeaderMismatchError(
            f"{path}: {len(trailing)} trailing bytes after {count} records"
        )
    return header, traces


# ---------------------------------------------------------------- state ----


def _pack_bits(flags: np.ndarray) -> bytes:
    return np.packbits(flags.astype(np.uint8), bitorder="little").tobytes()


def _unpack_bits(raw: bytes, n: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little", count=n)
    return bits.astype(bool)


def write_state(path: str, state: CoverageState) -> None:
    header = {
        "version": FORMAT_VERSION,
        "model_id": state.model_id,
        "profile_hash": state.profile_hash,
        "config": state.config.to_dict(),
        "layer_sizes": state.layer_sizes,
        "inputs_seen": state.inputs_seen,
        "pattern_count": len(state.pattern_set),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    chunks = [STATE_MAGIC, struct.pack("<I", len(header_bytes)), header_bytes]
    for j, width in enumerate(state.layer_sizes):
        packed = np.packbits(state.sections[j].astype(np.uint8), axis=1, bitorder="little")
        chunks.append(packed.tobytes())
        for flags in (state.upper[j], state.lower[j], state.topk[j], state.nc[j]):
            chunks.append(_pack_bits(flags))
    for pattern in sorted(state.pattern_set):
        chunks.append(struct.pack("<I", len(pattern)))
        chunks.append(pattern)
    _atomic_write(path, b"".join(chunks))


def read_state(path: str, profile: NeuronProfile = None) -> CoverageState:
    """Load a state; attach `profile` (verified against the stored hash) to
    make the state updatable again."""
    with open(path, "rb") as f:
        header = _read_header(f, STATE_MAGIC, path, versioned=False)
        config = CoverageConfig.from_dict(header["config"])
        layer_sizes = [int(w) for w in header["layer_sizes"]]
        state = CoverageState(
            header["model_id"], header["profile_hash"], config, layer_sizes
        )
        k = config.k_sections
        row_bytes = (k + 7) // 8
        for j, width in enumerate(layer_sizes):
            raw = _read_exact(f, width * row_bytes, f"section bits of layer {j}")
            packed = np.frombuffer(raw, dtype=np.uint8).reshape(width, row_bytes)
            state.sections[j] = np.unpackbits(
                packed, axis=1, count=k, bitorder="little"
            ).astype(bool)
            flag_bytes = (width + 7) // 8
            state.upper[j] = _unpack_bits(_read_exact(f, flag_bytes, "upper flags"), width)
            state.lower[j] = _unpack_bits(_read_exact(f, flag_bytes, "lower flags"), width)
            state.topk[j] = _unpack_bits(_read_exact(f, flag_bytes, "topk flags"), width)
            state.nc[j] = _unpack_bits(_read_exact(f, flag_bytes, "nc flags"), width)
        for p in range(int(header["pattern_count"])):
            (plen,) = struct.unpack("<I", _read_exact(f, 4, f"pattern {p} length"))
            state.pattern_set.add(_read_exact(f, plen, f"pattern {p}"))
        state.inputs_seen = int(header["inputs_seen"])
        trailing = f.read()
    if trailing:
        raise HeaderMismatchError(f"{path}: {len(trailing)} trailing bytes")
    if profile is not None:
        if profile.profile_hash != state.profile_hash:
            raise BindingError(
                f"profile hash {profile.profile_hash} does not match state "
                f"binding {state.profile_hash}"
            )
        state.profile = profile
    return state
