"""
Isometry classification models.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class IsometryKind(str, Enum):
    """Dynamical type of a tree automorphism without inversions."""

    ELLIPTIC = "Elliptic"
    HYPERBOLIC = "Hyperbolic"


class IsometryClass(BaseModel):
    """Elliptic/hyperbolic type together with the translation length."""

    model_config = ConfigDict(frozen=True)

    kind: IsometryKind = Field(..., description="Elliptic or Hyperbolic")
    translation_length: int = Field(..., ge=0, description="Translation length in edges")

    @model_validator(mode="after")
    def check_length(self):
        """Elliptic iff the translation length vanishes; lengths are even."""
        if self.translation_length % 2:
            raise ValueError("translation length must be even")
        if (self.kind is IsometryKind.ELLIPTIC) != (self.translation_length == 0):
            raise ValueError("elliptic elements have translation length 0 and only they do")
        return self

    @classmethod
    def elliptic(cls) -> "IsometryClass":
        return cls(kind=IsometryKind.ELLIPTIC, translation_length=0)

    @classmethod
    def hyperbolic(cls, length: int) -> "IsometryClass":
        return cls(kind=IsometryKind.HYPERBOLIC, translation_length=length)

    @property
    def is_elliptic(self) -> bool:
        return self.kind is IsometryKind.ELLIPTIC

    @property
    def is_hyperbolic(self) -> bool:
        return self.kind is IsometryKind.HYPERBOLIC

    def __str__(self) -> str:
        return f"{self.kind.value} ℓ={self.translation_length}"
