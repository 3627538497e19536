"""Multi-granularity neuron-coverage analysis for feedforward networks.

The toolkit profiles a trained model's per-neuron activation bounds on
its training data, then gauges how thoroughly a test suite exercises the
network: section coverage inside those bounds (kmnc), excursions past
them (nbc/snac), per-layer top-k membership (tknc) and distinct top-k
patterns (tknp), plus the classic thresholded neuron-coverage baseline
(nc).  Gradient-sign attacks and bit-exact file formats round out the
pipeline.
"""

from .attacks import AttackConfig, attack_suite, bim, fgsm
from .coverage import (
    CoverageConfig,
    CoverageDelta,
    CoverageReport,
    CoverageState,
    diff,
    encode_pattern,
    merge,
    new_state,
)
from .data import Dataset, concat_datasets, make_synthetic_dataset
from .errors import (
    ArgumentError,
    BadMagicError,
    BindingError,
    DataError,
    DimensionError,
    FormatError,
    HeaderMismatchError,
    MergeError,
    NncovError,
    TraceError,
    TruncatedError,
    UnknownNeuronError,
    VersionMismatchError,
)
from .model import (
    ActivationTrace,
    LayerSpec,
    Model,
    NeuronId,
    TrainResult,
    build_mlp,
    dataset_accuracy,
    dataset_loss,
    forward,
    loss_and_gradients,
    predict,
    train_sgd,
)
from .profiler import NeuronProfile, Region, profile, region_of
from .rng import SplitMix64, fnv1a64, fnv1a64_hex
from .tensor import Tensor, argmax, matmul, relu, sigmoid, softmax

__version__ = "0.1.0"

__all__ = [
    "ActivationTrace",
    "ArgumentError",
    "AttackConfig",
    "BadMagicError",
    "BindingError",
    "CoverageConfig",
    "CoverageDelta",
    "CoverageReport",
    "CoverageState",
    "DataError",
    "Dataset",
    "DimensionError",
    "FormatError",
    "HeaderMismatchError",
    "LayerSpec",
    "MergeError",
    "Model",
    "NeuronId",
    "NeuronProfile",
    "NncovError",
    "Region",
    "SplitMix64",
    "Tensor",
    "TraceError",
    "TrainResult",
    "TruncatedError",
    "UnknownNeuronError",
    "VersionMismatchError",
    "argmax",
    "attack_suite",
    "bim",
    "build_mlp",
    "concat_datasets",
    "dataset_accuracy",
    "dataset_loss",
    "diff",
    "encode_pattern",
    "fgsm",
    "fnv1a64",
    "fnv1a64_hex",
    "forward",
    "loss_and_gradients",
    "make_synthetic_dataset",
    "matmul",
    "merge",
    "new_state",
    "predict",
    "profile",
    "region_of",
    "relu",
    "sigmoid",
    "softmax",
    "train_sgd",
]
