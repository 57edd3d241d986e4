"""
Error Types

Exception hierarchy shared by every package. Each error carries a stable
error code and the process exit code the CLI reports for it.
"""

from typing import Optional


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class MinerError(Exception):
    """Base error with exit code and error code."""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_RUNTIME,
        error_code: str = "INTERNAL_ERROR"
    ):
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code
        super().__init__(message)


class ValidationError(MinerError):
    """Invalid input, configuration or parameter value."""

    def __init__(self, message: str = "Validation failed", error_code: str = "VALIDATION_ERROR"):
        super().__init__(message, EXIT_VALIDATION, error_code)


class ShapeMismatchError(ValidationError):
    """Array shapes do not line up (channels, samples, bins or lengths)."""

    def __init__(self, message: str = "Shape mismatch"):
        super().__init__(message, "SHAPE_MISMATCH")


class DatasetError(ValidationError):
    """A dataset manifest or trial file is inconsistent."""

    def __init__(self, message: str = "Dataset is invalid", trial: Optional[str] = None):
        self.trial = trial
        if trial is not None:
            message = f"{message} (trial: {trial})"
        super().__init__(message, "DATASET_ERROR")


class NotFoundError(MinerError):
    """A required file (checkpoint, manifest, config) does not exist."""

    def __init__(self, message: str = "Resource not found"):
        super().__init__(message, EXIT_VALIDATION, "NOT_FOUND")


class NumericalError(MinerError):
    """NaN or Inf appeared in a loss or gradient."""

    def __init__(self, message: str = "Numerical failure", parameter: Optional[str] = None):
        self.parameter = parameter
        if parameter is not None:
            message = f"{message} (parameter: {parameter})"
        super().__init__(message, EXIT_RUNTIME, "NUMERICAL_ERROR")
