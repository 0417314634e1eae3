"""
Exception hierarchy for the Nielsen Orbit Lab.

Every error carries the process exit code used by the CLI and the HTTP status
code used by the API exception handlers.
"""

from typing import Any, Dict, Optional

from app import constants


class LabError(Exception):
    """Base class for all lab errors."""

    exit_code: int = constants.EXIT_FAILURE
    status_code: int = constants.HTTP_500_INTERNAL_SERVER_ERROR
    default_message: str = "Lab error."

    def __init__(self, message: Optional[str] = None, **details: Any):
        self.message = message or self.default_message
        self.details: Dict[str, Any] = details
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Serialize the error for JSON output."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": {key: _jsonable(value) for key, value in self.details.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return str(value)


class ConfigValidationError(LabError):
    exit_code = constants.EXIT_VALIDATION_ERROR
    status_code = constants.HTTP_400_BAD_REQUEST
    default_message = "Invalid configuration."


class ParseError(ConfigValidationError):
    default_message = constants.PARSE_ERROR


class WrongField(ConfigValidationError):
    default_message = constants.WRONG_FIELD


class NotAUnit(ConfigValidationError):
    default_message = constants.NOT_A_UNIT


class NotInSL2(ConfigValidationError):
    default_message = constants.NOT_IN_SL2


class IndexOutOfRange(ConfigValidationError, IndexError):
    default_message = constants.INDEX_OUT_OF_RANGE


class WrongArity(ConfigValidationError):
    default_message = constants.WRONG_ARITY


class DivisionByZero(LabError, ZeroDivisionError):
    exit_code = constants.EXIT_VALIDATION_ERROR
    status_code = constants.HTTP_422_UNPROCESSABLE_ENTITY
    default_message = constants.DIVISION_BY_ZERO


class RefusalError(LabError):
    """A computation refused rather than degrading silently."""

    exit_code = constants.EXIT_REFUSAL
    status_code = constants.HTTP_422_UNPROCESSABLE_ENTITY


class PrecisionExhausted(RefusalError):
    default_message = constants.PRECISION_EXHAUSTED


class RadiusTooLarge(RefusalError):
    default_message = constants.RADIUS_TOO_LARGE


class DepthExhausted(RefusalError):
    default_message = constants.DEPTH_EXHAUSTED


class BudgetExceeded(RefusalError):
    status_code = constants.HTTP_413_REQUEST_ENTITY_TOO_LARGE
    default_message = constants.BUDGET_EXCEEDED


class ReductionFailed(RefusalError):
    default_message = constants.REDUCTION_FAILED


class CommonFixedVertex(RefusalError):
    status_code = constants.HTTP_409_CONFLICT
    default_message = constants.COMMON_FIXED_VERTEX


class NoWitness(RefusalError):
    default_message = constants.NO_WITNESS
