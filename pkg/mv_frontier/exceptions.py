"""
Error hierarchy.

Every error knows the process exit code the CLI maps it to and can serialize
itself (kind, message, extra details such as a singularity certificate) for
the JSON error payload.
"""

from typing import Any

import numpy as np

from mv_frontier.utils import logger


class MvFrontierError(Exception):
    exit_code = 1

    def __init__(self, message: str = "", **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def kind(self) -> str:
        return type(self).__name__

    def as_dict(self) -> dict:
        out = {"error": self.kind, "message": self.message}
        for key, value in self.details.items():
            if isinstance(value, np.ndarray):
                value = value.tolist()
            out[key] = value
        return out


class UsageError(MvFrontierError):
    exit_code = 1


# ========= VALIDATION (exit 2) =========
class ValidationError(MvFrontierError):
    exit_code = 2


class DimensionMismatch(ValidationError):
    pass


class AsymmetryBeyondTolerance(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    """Raised with a `certificate`: a unit vector W with ΣWᵀ ≈ 0."""

    @property
    def certificate(self) -> np.ndarray | None:
        return self.details.get("certificate")


class NegativeDiagonal(ValidationError):
    pass


class RaggedRows(ValidationError):
    pass


class NonNumericCell(ValidationError):
    @property
    def row(self) -> int | None:
        return self.details.get("row")

    @property
    def col(self) -> int | None:
        return self.details.get("col")


class EmptyInput(ValidationError):
    pass


class InsufficientObservations(ValidationError):
    pass


class CoefficientSumViolation(ValidationError):
    pass


class ZeroExcessReturns(ValidationError):
    pass


class ZeroVariancePortfolio(ValidationError):
    pass


class NonPositiveSystemicVariance(ValidationError):
    pass


class InvalidRange(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


# ========= DEGENERATE MATH (exit 3) =========
class DegenerateMathError(MvFrontierError):
    exit_code = 3


class TangencyUndefined(DegenerateMathError):
    pass


class NegativeTangency(DegenerateMathError):
    pass


class DegenerateFrontier(DegenerateMathError):
    pass


class EqualFundReturns(DegenerateMathError):
    pass


def throw(message: str, exc: type[MvFrontierError] = ValidationError, **details: Any):
    """Log and raise `exc` (a ValidationError unless told otherwise)."""
    logger().error(f"[{exc.__name__}] {message}")
    raise exc(message, **details)
