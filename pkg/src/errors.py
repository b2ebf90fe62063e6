"""Typed failures raised by the evaluators, the catalog and the sampler."""
from __future__ import annotations

from typing import Any, Optional


class QidError(ValueError):
    """Base class for every refusal the package raises on purpose."""


class PoleError(QidError):
    def __init__(self, message: str, index: Optional[int] = None) -> None:
        super().__init__(message if index is None else f"{message} (index {index})")
        self.index = index


class NumericalOverflowError(QidError):
    pass


class DivergesError(QidError):
    def __init__(self, message: str, diagnostic: Any = None) -> None:
        super().__init__(message)
        self.diagnostic = diagnostic


class SlowConvergenceError(QidError):
    pass


class CapError(QidError):
    pass


class InadmissibleError(QidError):
    def __init__(self, reason: str) -> None:
        super().__init__(f"inadmissible parameters: {reason}")
        self.reason = reason


class ExhaustedError(QidError):
    def __init__(self, identity: str, attempts: int, reason: str) -> None:
        super().__init__(
            f"{identity}: no admissible draw after {attempts} attempts (most frequent rejection: {reason})"
        )
        self.identity = identity
        self.reason = reason


class UsageError(QidError):
    pass
