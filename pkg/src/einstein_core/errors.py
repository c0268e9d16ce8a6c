"""Exception types shared across the package."""

from __future__ import annotations


class ShapeError(ValueError):
    """Operands have incompatible index shapes."""


class TensorFormatError(ValueError):
    """A serialized tensor is malformed.

    ``field`` holds the path of the offending field (e.g. ``"re"``).
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class IndexTooHigh(ArithmeticError):
    """The tensor has index > 1, so no group or core inverse exists."""

    def __init__(self, index: int):
        super().__init__(f"tensor has index {index}; an index-1 (core) tensor is required")
        self.index = index


class RankAmbiguous(ArithmeticError):
    """A singular value sits too close to the rank threshold to classify."""


class NotConsistent(ArithmeticError):
    """The right-hand side does not lie in the range of the coefficient tensor."""


class GenerationExhausted(RuntimeError):
    """A random generator could not meet its structural constraints."""
