"""
Density certificate models.
"""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class CertificateStatus(str, Enum):
    CERTIFIED = "Certified"
    NOT_CERTIFIED = "NotCertified"


class NotCertifiedReason(str, Enum):
    """Hypothesis of the density criterion that could not be witnessed."""

    BOUNDED = "bounded"
    DISCRETE = "discrete"
    ZARISKI = "zariski"
    TRACE_FIELD = "trace-field"


class UnboundednessWitness(BaseModel):
    """A hyperbolic word."""

    word: str = Field(..., description="Word in letter notation, e.g. 'g1 g2^-1'")
    translation_length: int = Field(..., gt=0, description="Translation length of the word")


class NonDiscretenessWitness(BaseModel):
    """A word whose power acts trivially on a ball without being the identity."""

    word: str = Field(..., description="Word in letter notation")
    exponent: int = Field(1, ge=1, description="Power of the word that is checked")
    level: int = Field(..., ge=1, description="Congruence level m")
    base_vertex: str = Field(..., description="Encoding of the vertex the congruence is read at")


class ZariskiWitness(BaseModel):
    """Two hyperbolic words with four pairwise distinct fixed points on the projective line."""

    words: List[str] = Field(..., min_length=2, max_length=2)


class TraceFieldWitness(BaseModel):
    """Combination of adjoint-trace values with valuation one, or the automatic marker."""

    automatic: bool = Field(False, description="True for Q_p, where every closed subfield is Q_p")
    words: List[str] = Field(default_factory=list, description="Words whose values are combined")
    shifted: List[bool] = Field(
        default_factory=list, description="Whether the constant term was subtracted from each value"
    )
    exponents: List[int] = Field(default_factory=list, description="Integer exponents of each value")
    valuations: List[int] = Field(default_factory=list, description="Valuation of each value")

    @model_validator(mode="after")
    def check_shapes(self):
        if not self.automatic:
            n = len(self.words)
            if n == 0 or not (len(self.shifted) == len(self.exponents) == len(self.valuations) == n):
                raise ValueError("trace-field witness lists must be non-empty and of equal length")
            if sum(e * v for e, v in zip(self.exponents, self.valuations)) != 1:
                raise ValueError("trace-field combination must have valuation 1")
        return self


class DensityCertificate(BaseModel):
    """Outcome of the density search with every witness that was found."""

    status: CertificateStatus
    reasons: List[NotCertifiedReason] = Field(default_factory=list)
    field: str = Field(..., description="Field label, e.g. Q_5")
    word_length: int = Field(..., ge=1)
    nd_level: int = Field(..., ge=1)
    unbounded: Optional[UnboundednessWitness] = None
    nondiscrete: Optional[NonDiscretenessWitness] = None
    zariski: Optional[ZariskiWitness] = None
    trace_field: Optional[TraceFieldWitness] = None
    words_examined: int = Field(0, ge=0)
    words_skipped: int = Field(0, ge=0, description="Words dropped for exhausted precision")

    @model_validator(mode="after")
    def check_status(self):
        if self.status is CertificateStatus.CERTIFIED and self.reasons:
            raise ValueError("a certified result carries no reasons")
        if self.status is CertificateStatus.NOT_CERTIFIED and not self.reasons:
            raise ValueError("a non-certified result needs at least one reason")
        return self

    @property
    def certified(self) -> bool:
        return self.status is CertificateStatus.CERTIFIED
