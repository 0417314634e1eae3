"""
Pydantic models for the Nielsen Orbit Lab.
"""

from .api_models import (
    CensusRequest,
    CertifyRequest,
    ClassifyRequest,
    ClassifyResponse,
    NielsenWordResponse,
    NormalizeRequest,
    ReduceRequest,
    TupleRequest,
)
from .census_models import FiniteGroupKind, OrbitRow, TupleOrbitReport
from .certificate_models import (
    CertificateStatus,
    DensityCertificate,
    NonDiscretenessWitness,
    NotCertifiedReason,
    TraceFieldWitness,
    UnboundednessWitness,
    ZariskiWitness,
)
from .classification_models import IsometryClass, IsometryKind
from .experiment_models import (
    DensityTrialRecord,
    ExperimentConfig,
    ExperimentKind,
    ExperimentSummary,
    NormalizeTrialRecord,
    TreeautTrialRecord,
    TupleFamily,
)
from .field_models import FieldKind, FieldSpec, TreeSpec
from .system_models import ErrorResponse, HealthResponse

__all__ = [
    "CensusRequest",
    "CertifyRequest",
    "ClassifyRequest",
    "ClassifyResponse",
    "NielsenWordResponse",
    "NormalizeRequest",
    "ReduceRequest",
    "TupleRequest",
    "FiniteGroupKind",
    "OrbitRow",
    "TupleOrbitReport",
    "CertificateStatus",
    "DensityCertificate",
    "NonDiscretenessWitness",
    "NotCertifiedReason",
    "TraceFieldWitness",
    "UnboundednessWitness",
    "ZariskiWitness",
    "IsometryClass",
    "IsometryKind",
    "DensityTrialRecord",
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentSummary",
    "NormalizeTrialRecord",
    "TreeautTrialRecord",
    "TupleFamily",
    "FieldKind",
    "FieldSpec",
    "TreeSpec",
    "ErrorResponse",
    "HealthResponse",
]
