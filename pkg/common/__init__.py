"""Shared error types."""

from common.errors import (
    EXIT_OK,
    EXIT_VALIDATION,
    EXIT_RUNTIME,
    MinerError,
    ValidationError,
    ShapeMismatchError,
    DatasetError,
    NotFoundError,
    NumericalError,
)

__all__ = [
    "EXIT_OK",
    "EXIT_VALIDATION",
    "EXIT_RUNTIME",
    "MinerError",
    "ValidationError",
    "ShapeMismatchError",
    "DatasetError",
    "NotFoundError",
    "NumericalError",
]
