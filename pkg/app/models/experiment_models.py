"""
Experiment configuration and per-trial record models.
"""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from app.models.field_models import FieldSpec, TreeSpec


class ExperimentKind(str, Enum):
    DENSITY = "density"
    NORMALIZE = "normalize"
    TREEAUT = "treeaut"


class TupleFamily(str, Enum):
    """Which sampler builds the tuples of a trial."""

    GENERIC = "generic"
    SUBFIELD = "subfield"
    ELLIPTIC = "elliptic"
    MIXED = "mixed"
    CONSTRUCTED = "constructed"


class ExperimentConfig(BaseModel):
    """Parameters of one seeded Monte Carlo run."""

    kind: ExperimentKind
    family: TupleFamily = TupleFamily.GENERIC
    field: Optional[FieldSpec] = Field(None, description="Local field for matrix experiments")
    tree: Optional[TreeSpec] = Field(None, description="Abstract tree for portrait experiments")
    k: int = Field(2, ge=2, description="Tuple size")
    trials: int = Field(200, ge=0)
    length_law: float = Field(0.5, gt=0.0, le=1.0, description="Geometric parameter of the half translation length")
    max_translation: int = Field(3, ge=1)
    word_length: int = Field(6, ge=1, description="Word-length budget L")
    nd_level: int = Field(1, ge=1, description="Congruence level m")
    subfield_power: int = Field(2, ge=2, description="Exponent m of the subfield F_p((t^m))")
    reduction_budget: int = Field(10_000, ge=1)
    scan_radius: int = Field(6, ge=0)
    seed: int = Field(0, ge=0, lt=2**64)
    workers: int = Field(1, ge=1)
    output: Optional[str] = None

    @model_validator(mode="after")
    def check_consistency(self):
        if self.kind is ExperimentKind.NORMALIZE and self.k < 3:
            raise ValueError("normalization experiments need k >= 3")
        if self.kind is ExperimentKind.TREEAUT:
            if self.tree is None:
                raise ValueError("tree spec required for portrait experiments")
        elif self.field is None:
            raise ValueError("field spec required for matrix experiments")
        if self.field is not None and self.nd_level >= self.field.precision:
            raise ValueError("nd_level must be smaller than the precision")
        if self.family is TupleFamily.SUBFIELD and (self.field is None or self.field.is_padic):
            raise ValueError("the subfield family needs a Laurent series field")
        if self.kind is ExperimentKind.DENSITY and self.family not in (TupleFamily.GENERIC, TupleFamily.SUBFIELD):
            raise ValueError("density experiments sample the generic or subfield family")
        if self.kind is ExperimentKind.NORMALIZE and self.family is TupleFamily.SUBFIELD:
            raise ValueError("normalization experiments do not sample the subfield family")
        return self


class DensityTrialRecord(BaseModel):
    trial: int
    seed: int
    status: str
    reasons: List[str] = Field(default_factory=list)
    unbounded: Optional[str] = None
    nondiscrete: Optional[str] = None
    zariski: Optional[List[str]] = None
    trace_field: Optional[str] = None
    verified: bool = False
    error: Optional[str] = None


class NormalizeTrialRecord(BaseModel):
    trial: int
    seed: int
    family: str
    reduce_word: Optional[str] = None
    normalize_word: Optional[str] = None
    word: Optional[str] = None
    in_O: bool = False
    verified: bool = False
    error: Optional[str] = None


class TreeautTrialRecord(BaseModel):
    trial: int
    seed: int
    translation_length: Optional[int] = None
    power_law: Optional[bool] = None
    pair_distance: Optional[int] = None
    pair_length: Optional[int] = None
    normalize_word: Optional[str] = None
    in_O: bool = False
    error: Optional[str] = None


class ExperimentSummary(BaseModel):
    """Final row of every experiment output."""

    summary: bool = True
    kind: ExperimentKind
    family: TupleFamily
    trials: int
    successes: int
    errors: int
    success_fraction: float = Field(..., description="successes / trials, 0.0 when there are no trials")
    seed: int
