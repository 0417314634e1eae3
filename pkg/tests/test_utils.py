import io
import json

import pytest

from app import constants
from app.config import Settings
from app.exceptions import BudgetExceeded, ConfigValidationError, ParseError, PrecisionExhausted
from app.models.census_models import FiniteGroupKind
from app.models.field_models import FieldKind
from app.utils.helpers import (
    fraction,
    parse_rational_matrix,
    split_entries,
    to_json_line,
    trial_seed,
    write_json_lines,
)
from app.utils.validators import validate_census, validate_field


def test_settings_read_prefixed_environment(monkeypatch):
    monkeypatch.setenv("LAB_PRIME", "7")
    monkeypatch.setenv("LAB_FIELD_KIND", " Laurent ")
    monkeypatch.setenv("LAB_LOG_LEVEL", "debug")
    settings = Settings()
    assert settings.prime == 7
    assert settings.field_kind == "laurent"
    assert settings.log_level == "DEBUG"


def test_error_codes():
    assert ParseError().exit_code == constants.EXIT_VALIDATION_ERROR
    assert PrecisionExhausted().exit_code == constants.EXIT_REFUSAL
    error = BudgetExceeded("too big", required=10, budget=(1, 2))
    assert error.status_code == 413
    assert error.to_dict() == {
        "error": "BudgetExceeded",
        "message": "too big",
        "details": {"required": 10, "budget": [1, 2]},
    }


def test_validate_field():
    spec = validate_field({"kind": "laurent", "p": 3, "precision": 16})
    assert spec.kind is FieldKind.LAURENT
    assert spec.label() == "F_3((t))"
    with pytest.raises(ConfigValidationError) as exc_info:
        validate_field({"kind": "padic", "p": 4, "precision": 2})
    assert len(exc_info.value.message.split("; ")) == 2


def test_validate_census():
    assert validate_census("PSL2", 5, 3) is FiniteGroupKind.PSL2
    with pytest.raises(ConfigValidationError) as exc_info:
        validate_census("GL2", 2, 0)
    assert exc_info.value.message.count(";") == 2


def test_parse_rational_matrix(q5):
    g = parse_rational_matrix(q5, "5, 0, 0, 1/5")
    assert g.translation_length() == 2
    with pytest.raises(ParseError):
        parse_rational_matrix(q5, "1,0,0")
    with pytest.raises(ParseError):
        parse_rational_matrix(q5, "1,0,x/,1")


def test_split_entries():
    assert split_entries("a\n\n  b  \n") == ["a", "b"]


def test_json_lines():
    stream = io.StringIO()
    assert write_json_lines([{"b": 1, "a": 2}, {"c": None}], stream) == 2
    assert stream.getvalue() == '{"a":2,"b":1}\n{"c":null}\n'
    assert json.loads(to_json_line({"x": [1, 2]})) == {"x": [1, 2]}


def test_trial_seed_and_fraction():
    assert trial_seed(1, 0) == trial_seed(1, 0)
    assert trial_seed(1, 0) != trial_seed(1, 1)
    assert fraction(0, 0) == 0.0
    assert fraction(1, 4) == 0.25
