"""
Typed errors raised by scompress.

Every error derives from CompressionError, itself a ValueError, so callers
that only care about invalid input can keep catching ValueError.
"""

from typing import Any, Optional


class CompressionError(ValueError):
    """Base class for all scompress errors."""


class LabelSpaceMismatchError(CompressionError):
    """A label or loss does not fit the label space it is used with."""


class EmptySampleError(CompressionError):
    """An operation that needs at least one example got an empty sample."""


class EmptyClassError(CompressionError):
    """An operation that needs at least one concept got an empty class."""


class InvalidClassError(CompressionError):
    """A concept table violates its construction invariants."""


class UnrealizableSampleError(CompressionError):
    """No concept of the class is consistent with the sample."""


class BudgetExceededError(CompressionError):
    """No compression within the declared budget reproduces the sample."""


class SchemeFailureError(CompressionError):
    """A scheme could not complete its construction on the given input."""


class DecodeError(CompressionError):
    """A bitstring could not be decoded."""


class ConstructionError(CompressionError):
    """A scheme or reduction was built from inputs that violate its preconditions."""


class FileFormatError(CompressionError):
    """A JSON payload does not follow the expected format."""


class WitnessedError(CompressionError):
    """An error that carries a concrete witness of the failure."""

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness


class AssumptionViolationError(WitnessedError):
    """A runtime check of a reduction's hypothesis failed."""


class GenerationError(WitnessedError):
    """A corpus generator produced a class without its declared property."""
