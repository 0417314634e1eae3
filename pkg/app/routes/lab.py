"""
Lab API routes.
"""

from fastapi import APIRouter

from app.models.api_models import (
    CensusRequest,
    CertifyRequest,
    ClassifyRequest,
    ClassifyResponse,
    NielsenWordResponse,
    NormalizeRequest,
    ReduceRequest,
)
from app.models.census_models import TupleOrbitReport
from app.models.certificate_models import DensityCertificate
from app.services import psl2
from app.services.lab_service import lab_service
from app.utils.helpers import parse_tuple
from app.utils.logger import get_logger

logger = get_logger(__name__)

router = APIRouter(prefix="/lab", tags=["Lab"])


@router.post("/classify", response_model=ClassifyResponse)
def classify(request: ClassifyRequest) -> ClassifyResponse:
    """
    Classify an element of PSL2(K) by its trace, cross-checked against the tree.

    Args:
        request: Field and matrix encoding

    Returns:
        Class, translation length, trace valuation and oracle agreement
    """
    g = psl2.decode(request.field, request.element)
    return lab_service.classify(g, oracle=request.oracle)


@router.post("/reduce", response_model=NielsenWordResponse)
def reduce(request: ReduceRequest) -> NielsenWordResponse:
    t = parse_tuple(request.field, request.entries)
    return lab_service.reduce(t, request.budget)


@router.post("/normalize", response_model=NielsenWordResponse)
def normalize(request: NormalizeRequest) -> NielsenWordResponse:
    """
    Nielsen word taking the tuple into O (elliptic first entry, hyperbolic second).

    Refusals (ReductionFailed, CommonFixedVertex, NoWitness) come back as
    ErrorResponse bodies with their status codes.
    """
    t = parse_tuple(request.field, request.entries)
    return lab_service.normalize(t, request.budget, request.scan_radius)


@router.post("/certify", response_model=DensityCertificate)
def certify(request: CertifyRequest) -> DensityCertificate:
    t = parse_tuple(request.field, request.entries)
    certificate = lab_service.certify(t, request.word_length, request.nd_level)
    logger.info("certificate issued", status=certificate.status.value, words=certificate.words_examined)
    return certificate


@router.post("/prg-census", response_model=TupleOrbitReport)
def prg_census(request: CensusRequest) -> TupleOrbitReport:
    """Nielsen orbits on all k-tuples of a finite group, guarded by the tuple budget."""
    return lab_service.census(request.kind, request.p, request.k, request.allow_large)
