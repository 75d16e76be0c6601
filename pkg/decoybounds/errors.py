# decoybounds/errors.py
"""
Exceptions raised by the decoybounds services.
"""
from decoybounds.api.models import ErrorCode, ErrorResponse


class DecoyBoundsError(Exception):
    """Base class for all decoybounds failures."""

    error_code = ErrorCode.INTERNAL_ERROR

    def to_response(self) -> ErrorResponse:
        return ErrorResponse(error_code=self.error_code, message=str(self))


class DomainError(DecoyBoundsError, ValueError):
    """An argument lies outside the domain of the operation."""

    error_code = ErrorCode.DOMAIN_ERROR


class InvalidIntensityError(DomainError):
    error_code = ErrorCode.INVALID_INTENSITY


class InvalidParamsError(DomainError):
    error_code = ErrorCode.INVALID_PARAMS


class InsufficientCutoffError(DomainError):
    """A truncated sum cannot meet its tail tolerance."""

    error_code = ErrorCode.INSUFFICIENT_CUTOFF


class MissingPairError(DecoyBoundsError, KeyError):
    error_code = ErrorCode.MISSING_PAIR

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing intensity pair"


class InfeasibleDomainError(DecoyBoundsError, ArithmeticError):
    """The constrained minimization problem has no admissible minimum."""

    error_code = ErrorCode.INFEASIBLE_DOMAIN


class ConfigError(DecoyBoundsError):
    error_code = ErrorCode.CONFIG_ERROR


class ReportError(DecoyBoundsError, OSError):
    """Sweep results could not be written."""

    error_code = ErrorCode.IO_ERROR
