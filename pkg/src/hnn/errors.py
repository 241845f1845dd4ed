class HNNError(ValueError):
    """Base class for input errors raised by this package."""


class OddDimensionError(HNNError):
    """A Haar transform was asked for an odd (or nonpositive) size."""


class NonFiniteError(HNNError):
    """Input contains NaN or infinite values."""


class EmptyMaskError(HNNError):
    """Completion requested with no observed entries."""


class TensorFormatError(HNNError):
    """Malformed or truncated tensor file."""
