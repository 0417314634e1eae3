"""
Request-level operations shared by the CLI and the HTTP API.
"""

from app.exceptions import LabError
from app.models.api_models import ClassifyResponse, NielsenWordResponse
from app.models.census_models import FiniteGroupKind, TupleOrbitReport
from app.models.certificate_models import DensityCertificate
from app.services import bttree, density, nielsen, prg, psl2, treeaut
from app.services.nielsen import MarkedTuple, NielsenWord
from app.services.psl2 import ProjectiveMatrix
from app.services.treeaut import TreePortrait
from app.utils.logger import get_logger

logger = get_logger(__name__)


class LabService:
    """Classification, Nielsen reduction, certification and census front door."""

    def classify(self, g: ProjectiveMatrix, oracle: bool = True) -> ClassifyResponse:
        """
        Trace classification with an optional displacement-oracle cross-check.

        Raises:
            PrecisionExhausted: If the trace valuation is undeterminable
        """
        cls = psl2.classify(g)
        response = ClassifyResponse(
            kind=cls.kind.value,
            translation_length=cls.translation_length,
            trace_valuation=psl2.trace_valuation(g),
        )
        if oracle:
            observed = bttree.displacement_oracle(g)
            response.oracle_length = observed.translation_length
            response.oracle_agrees = observed == cls
            if not response.oracle_agrees:
                logger.warning("oracle disagrees", matrix=psl2.encode(g), trace=cls.translation_length)
        return response

    def classify_portrait(self, g: TreePortrait) -> ClassifyResponse:
        cls = treeaut.classify_portrait(g)
        return ClassifyResponse(kind=cls.kind.value, translation_length=cls.translation_length)

    def describe(self, word: NielsenWord, t: MarkedTuple) -> NielsenWordResponse:
        result = nielsen.apply_word(word, t)
        in_O = None
        if result.k >= 2:
            in_O = nielsen.membership_O(result, 1, 2)
        return NielsenWordResponse(
            word=nielsen.format_word(word),
            entries=[e.encode() for e in result.entries],
            classes=[str(c) for c in result.classes()],
            in_O=in_O,
        )

    def reduce(self, t: MarkedTuple, budget: int) -> NielsenWordResponse:
        return self.describe(nielsen.reduce_to_elliptic(t, budget), t)

    def normalize(self, t: MarkedTuple, budget: int, scan_radius: int) -> NielsenWordResponse:
        """Reduce to an elliptic first entry, then move a hyperbolic entry into position 2."""
        reduce_word = nielsen.reduce_to_elliptic(t, budget)
        reduced = nielsen.apply_word(reduce_word, t)
        word = reduce_word + nielsen.normalize_to_O(reduced, scan_radius)
        return self.describe(word, t)

    def certify(self, t: MarkedTuple, word_length: int, nd_level: int) -> DensityCertificate:
        return density.certify_dense(t, word_length, nd_level)

    def verify_word(self, t: MarkedTuple, word: NielsenWord, target: str = "O") -> bool:
        """
        Re-apply a Nielsen word and check the claimed end state.

        target ``O`` means entry 1 elliptic and entry 2 hyperbolic;
        ``elliptic`` means entry 1 elliptic.
        """
        try:
            result = nielsen.apply_word(word, t)
            if target == "elliptic":
                return result[1].classify().is_elliptic
            return nielsen.membership_O(result, 1, 2)
        except LabError as e:
            logger.info("word verification failed", error=type(e).__name__)
            return False

    def census(self, kind: FiniteGroupKind, p: int, k: int, allow_large: bool = False) -> TupleOrbitReport:
        return prg.orbit_census(prg.FiniteMatrixGroup(kind, p), k, allow_large)

    def verify_certificate(self, t: MarkedTuple, text: str) -> bool:
        return density.verify_certificate(t, density.decode_certificate(text))


# Global service instance
lab_service = LabService()
