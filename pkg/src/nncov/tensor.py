"""Dense float32 tensors and the few numeric ops the inference engine needs.

Values are stored as flat row-major float32; matrix products accumulate in
float64 and round to float32 on store.  Nothing here aims at BLAS-grade
speed -- models are desk scale.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DimensionError


@dataclass(frozen=True)
class Tensor:
    """Immutable dense tensor: `shape` plus flat row-major float32 `data`."""

    shape: tuple
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if any(d <= 0 for d in self.shape):
            raise DimensionError(f"non-positive dimension in shape {self.shape}")
        if self.data.dtype != np.float32 or self.data.ndim != 1:
            raise DimensionError("data must be a flat float32 array")
        if int(np.prod(self.shape)) != self.data.size:
            raise DimensionError(
                f"shape {self.shape} needs {int(np.prod(self.shape))} values, got {self.data.size}"
            )
        self.data.setflags(write=False)

    @classmethod
    def from_array(cls, values) -> "Tensor":
        arr = np.array(values, dtype=np.float32, order="C")
        if arr.ndim == 0:
            arr = arr.reshape(1)
        return cls(tuple(arr.shape), arr.reshape(-1))

    @classmethod
    def row(cls, values) -> "Tensor":
        """1 x n tensor from a flat vector."""
        arr = np.asarray(values, dtype=np.float32).reshape(-1)
        return cls((1, arr.size), arr.copy())

    @classmethod
    def zeros(cls, *shape) -> "Tensor":
        return cls(tuple(shape), np.zeros(int(np.prod(shape)), dtype=np.float32))

    @property
    def array(self) -> np.ndarray:
        """Read-only view with the declared shape."""
        return self.data.reshape(self.shape)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with float64 accumulation, rounded to float32 on store."""
    if len(a.shape) != 2 or len(b.shape) != 2:
        raise DimensionError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"inner dimensions disagree: {a.shape} x {b.shape}")
    product = a.array.astype(np.float64) @ b.array.astype(np.float64)
    return Tensor.from_array(product.astype(np.float32))


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"shapes disagree: {a.shape} vs {b.shape}")
    return Tensor(a.shape, (a.data + b.data).astype(np.float32))


def relu(t: Tensor) -> Tensor:
    return Tensor(t.shape, np.maximum(t.data, np.float32(0.0)))


def sigmoid(t: Tensor) -> Tensor:
    # Evaluated in float64 on the stored float32 values, rounded back on store.
    with np.errstate(over="ignore"):
        out = 1.0 / (1.0 + np.exp(-t.data.astype(np.float64)))
    return Tensor(t.shape, out.astype(np.float32))


def identity(t: Tensor) -> Tensor:
    return t


def softmax(t: Tensor) -> Tensor:
    """Row softmax of a 1 x n tensor, max-subtracted for stability."""
    if len(t.shape) != 2 or t.shape[0] != 1:
        raise DimensionError(f"softmax expects a 1 x n tensor, got {t.shape}")
    z = t.data.astype(np.float64)
    z = np.exp(z - z.max())
    return Tensor(t.shape, (z / z.sum()).astype(np.float32))


def argmax(t: Tensor) -> int:
    """Index of the largest element of a 1 x n tensor; ties go to the lowest index."""
    if len(t.shape) != 2 or t.shape[0] != 1:
        raise DimensionError(f"argmax expects a 1 x n tensor, got {t.shape}")
    if t.data.size < 1:
        raise ArgumentError("argmax of empty tensor")
    return int(np.argmax(t.data))
