"""
Validation utilities for the Nielsen Orbit Lab.
"""

from typing import Any, Dict, List

from pydantic import ValidationError

from app.exceptions import ConfigValidationError
from app.models.census_models import FiniteGroupKind
from app.models.experiment_models import ExperimentConfig
from app.models.field_models import FieldSpec


def _messages(error: ValidationError) -> List[str]:
    out = []
    for item in error.errors():
        location = ".".join(str(part) for part in item.get("loc", ()))
        message = item.get("msg", "invalid value")
        out.append(f"{location}: {message}" if location else message)
    return out


def validate_experiment_config(data: Dict[str, Any]) -> ExperimentConfig:
    """
    Build an ExperimentConfig, collecting every problem.

    Args:
        data: Raw configuration values

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigValidationError: If validation fails
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigValidationError("; ".join(_messages(e))) from e


def validate_field(data: Dict[str, Any]) -> FieldSpec:
    """
    Raises:
        ConfigValidationError: If the field parameters are invalid
    """
    try:
        return FieldSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigValidationError("; ".join(_messages(e))) from e


def validate_census(kind: str, p: int, k: int) -> FiniteGroupKind:
    """
    Check census parameters before any table is built.

    Raises:
        ConfigValidationError: If validation fails
    """
    errors = []
    try:
        group_kind = FiniteGroupKind(kind)
    except ValueError:
        group_kind = None
        errors.append(f"unknown group kind: {kind}")
    if k < 1:
        errors.append("k must be >= 1")
    if p < 3:
        errors.append("p must be an odd prime")
    if errors:
        raise ConfigValidationError("; ".join(errors))
    return group_kind

