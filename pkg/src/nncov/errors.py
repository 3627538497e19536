"""Exception types shared across the toolkit.

Every failure mode callers are expected to handle has its own class so
tests (and the CLI exit-code mapping) can tell them apart.
"""


class NncovError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(NncovError):
    """Tensor/matrix shapes do not agree for the requested operation."""


class ArgumentError(NncovError):
    """A call argument is outside its allowed range (empty dataset, bad label, ...)."""


class UnknownNeuronError(NncovError):
    """A NeuronId does not exist in the referenced profile or model."""


class BindingError(NncovError):
    """Model / profile / config identities do not match."""


class MergeError(BindingError):
    """Two coverage states with different bindings cannot be merged."""


class TraceError(NncovError):
    """An activation trace does not fit the bound model's layout."""


class DataError(NncovError):
    """Trace or dataset payload contains an invalid value (e.g. NaN activation)."""


class FormatError(NncovError):
    """Base class for persistent-format violations."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class VersionMismatchError(FormatError):
    """File declares a format version this reader does not understand."""


class TruncatedError(FormatError):
    """File ends before the payload its header promises."""


class HeaderMismatchError(FormatError):
    """Payload disagrees with the file's own header (lengths, shapes, ids)."""
