"""Custom exceptions for identification and compensation operations"""

from typing import List


class NarxHysteresisError(Exception):
    """Base exception for PyNarxHysteresis operations"""

    exit_code = 1

    def __init__(self, message: str, detail: str | None = None):
        super().__init__(message)
        self.detail = detail


class ConfigError(NarxHysteresisError):
    """Raised when a configuration value is missing or invalid."""

    exit_code = 2

    def __init__(
        self, message: str, key_path: str | None = None, detail: str | None = None
    ):
        super().__init__(message, detail)
        self.key_path = key_path


class DataFormatError(ConfigError):
    """Raised when a dataset or artifact file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None, detail: str | None = None):
        super().__init__(message, detail=detail)
        self.line = line


class NumericError(NarxHysteresisError):
    """Raised when a numerical procedure fails."""

    exit_code = 3


class DivergenceError(NumericError):
    """Raised when a recursion or integration leaves the finite range."""

    def __init__(self, message: str, index: int, time_s: float | None = None):
        super().__init__(message)
        self.index = index
        self.time_s = time_s


class RankDeficiencyError(NumericError):
    """Raised when a regressor matrix loses column rank."""

    def __init__(self, message: str, columns: List[int]):
        super().__init__(message)
        self.columns = columns


class StructuralError(NarxHysteresisError):
    """Raised when a model structure violates a required assumption."""

    exit_code = 4

    def __init__(self, message: str, offending_terms: List[str] | None = None):
        super().__init__(message)
        self.offending_terms = offending_terms or []


class CausalityError(StructuralError):
    """Raised when a law or dataset would need samples from the future."""
