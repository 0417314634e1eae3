"""
Field and tree specification models.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator
from sympy import isprime


class FieldKind(str, Enum):
    """Supported non-Archimedean local fields."""

    PADIC = "padic"
    LAURENT = "laurent"


class FieldSpec(BaseModel):
    """A local field K = Q_p or F_p((t)) truncated at a fixed relative precision."""

    model_config = ConfigDict(frozen=True)

    kind: FieldKind = Field(FieldKind.PADIC, description="Q_p or F_p((t))")
    p: int = Field(5, description="Residue characteristic, an odd prime")
    precision: int = Field(32, ge=4, description="Tracked digits per element")

    @field_validator("p")
    @classmethod
    def validate_prime(cls, v):
        """Reject non-primes and p = 2."""
        if not isprime(v):
            raise ValueError(f"p must be prime, got {v}")
        if v == 2:
            raise ValueError("p = 2 is not supported")
        return v

    @property
    def q(self) -> int:
        """Size of the residue field."""
        return self.p

    @property
    def max_radius(self) -> int:
        """Largest ball radius the tree operations accept."""
        return self.precision - 2

    @property
    def is_padic(self) -> bool:
        return self.kind is FieldKind.PADIC

    def label(self) -> str:
        if self.is_padic:
            return f"Q_{self.p}"
        return f"F_{self.p}((t))"


class TreeSpec(BaseModel):
    """The abstract (q+1)-regular tree and the portrait depth used to sample it."""

    model_config = ConfigDict(frozen=True)

    q: int = Field(2, ge=2, le=9, description="Tree degree minus one")
    depth: int = Field(12, ge=1, description="Portrait depth")
