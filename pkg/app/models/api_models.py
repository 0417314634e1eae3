"""
Request and response bodies of the lab API.
"""

from typing import List, Optional

from pydantic import BaseModel, Field

from app.models.census_models import FiniteGroupKind
from app.models.field_models import FieldSpec


class ClassifyRequest(BaseModel):
    field: FieldSpec = Field(default_factory=FieldSpec)
    element: str = Field(..., description="Four element encodings joined by '|'")
    oracle: bool = Field(True, description="Cross-check with the displacement oracle")


class ClassifyResponse(BaseModel):
    kind: str
    translation_length: int
    trace_valuation: Optional[int] = Field(None, description="None when the trace is zero at precision")
    oracle_length: Optional[int] = None
    oracle_agrees: Optional[bool] = None


class TupleRequest(BaseModel):
    field: FieldSpec = Field(default_factory=FieldSpec)
    entries: List[str] = Field(..., min_length=1, description="Matrix encodings")


class CertifyRequest(TupleRequest):
    word_length: int = Field(6, ge=1)
    nd_level: int = Field(1, ge=1)


class ReduceRequest(TupleRequest):
    budget: int = Field(10_000, ge=1)


class NormalizeRequest(TupleRequest):
    budget: int = Field(10_000, ge=1)
    scan_radius: int = Field(6, ge=0)


class NielsenWordResponse(BaseModel):
    word: str = Field(..., description="Comma-separated Nielsen moves, applied left to right")
    entries: List[str] = Field(..., description="Transformed tuple")
    classes: List[str] = Field(..., description="Isometry class of each transformed entry")
    in_O: Optional[bool] = None


class CensusRequest(BaseModel):
    kind: FiniteGroupKind = FiniteGroupKind.SL2
    p: int = Field(5)
    k: int = Field(3, ge=1)
    allow_large: bool = False
