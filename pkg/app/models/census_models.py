"""
Product replacement census models.
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class FiniteGroupKind(str, Enum):
    SL2 = "SL2"
    PSL2 = "PSL2"


class OrbitRow(BaseModel):
    """One Nielsen orbit of k-tuples."""

    orbit_id: int = Field(..., ge=0)
    representative: List[int] = Field(..., description="Element indices of the least tuple in the orbit")
    size: int = Field(..., ge=1)
    generating: bool
    trace_class: Optional[int] = Field(None, description="Commutator trace for k = 2")


class TupleOrbitReport(BaseModel):
    """Census of the product replacement graph on all k-tuples of a finite group."""

    group: str = Field(..., description="Group label, e.g. SL2(F_5)")
    kind: FiniteGroupKind
    p: int
    k: int = Field(..., ge=1)
    group_order: int
    total_tuples: int
    generating_tuples: int
    non_generating_tuples: int
    orbit_count: int = Field(..., description="Number of orbits on generating tuples")
    orbit_sizes: List[int] = Field(default_factory=list, description="Sizes of the generating orbits")
    non_generating_orbits: int = 0
    trace_classes: Optional[Dict[str, int]] = Field(
        None, description="Generating orbits per commutator trace (k = 2)"
    )
    rows: List[OrbitRow] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_partition(self):
        if sum(self.orbit_sizes) != self.generating_tuples:
            raise ValueError("orbit sizes must sum to the generating-tuple count")
        if self.generating_tuples + self.non_generating_tuples != self.total_tuples:
            raise ValueError("generating and non-generating tuples must cover all tuples")
        return self

    def summary_lines(self) -> List[str]:
        lines = [
            f"group: {self.group}",
            f"k: {self.k}",
            f"tuples: {self.total_tuples}",
            f"generating tuples: {self.generating_tuples}",
            f"orbits on generating tuples: {self.orbit_count}",
            f"orbit sizes: {' '.join(str(s) for s in self.orbit_sizes)}",
            f"non-generating orbits: {self.non_generating_orbits}",
        ]
        if self.trace_classes is not None:
            classes = ", ".join(f"{key}:{value}" for key, value in sorted(self.trace_classes.items()))
            lines.append(f"commutator-trace classes: {classes}")
        return lines
