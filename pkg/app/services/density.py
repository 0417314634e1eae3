"""
Density certificates for finitely generated subgroups of PSL2(K).

A subgroup G is certified dense when four finite witnesses are found among
the reduced words of length at most L in the generators:

* unbounded: a hyperbolic word.
* non-discrete: a word w, an exponent n and a vertex x such that w^n acts
  trivially on the ball of radius m around x (B_x^-1 w^n B_x = +-1 mod pi^m)
  while w^n has infinite order.  In Q_p (p odd) the congruence kernel is
  torsion free, so w^n != 1 suffices; in F_p((t)) the kernel contains
  unipotent p-torsion, so w^n must also satisfy tr(w^n)^2 != 4.  An infinite
  subgroup of the compact congruence kernel is never discrete.  For n = 1
  and x the base vertex this is the statement w = 1 mod pi^m.  For an
  elliptic w, x is the midpoint of [v0, w v0], which w fixes, and
  n = lcm(2p, p - 1, p + 1) p^(m-1) kills the reduction mod pi and raises
  the result into level m.
* Zariski dense: two hyperbolic words whose four fixed points on P^1(K)
  are pairwise distinct.  Every proper algebraic subgroup of PSL2 lies in
  a Borel subgroup (one common fixed point), in the normalizer of a torus
  (hyperbolic elements of it share their fixed pair) or is finite (no
  element of infinite order).  Two hyperbolic elements with four distinct
  fixed points fit in none of these.
* trace field: for Q_p this is automatic, since every closed subfield
  contains the closure of Q, which is Q_p.  For F_p((t)) a product
  x = prod s_i^e_i of adjoint traces s_i (or of s_i minus their constant
  term, which lies in F_p) with v(x) = 1 is produced; the closed field it
  generates contains F_p((x)) = K.

Words are enumerated in shortlex order and witnesses are the first ones
found, so a certificate at length L is reproduced at every larger length.
"""

from math import gcd
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from sympy import ilcm

try:
    from sympy.core.intfunc import igcdex
except ImportError:  # sympy < 1.13
    from sympy.core.numbers import igcdex

from app.exceptions import ConfigValidationError, ParseError, PrecisionExhausted
from app.models.certificate_models import (
    CertificateStatus,
    DensityCertificate,
    NonDiscretenessWitness,
    NotCertifiedReason,
    TraceFieldWitness,
    UnboundednessWitness,
    ZariskiWitness,
)
from app.models.field_models import FieldSpec
from app.services import bttree, psl2
from app.services import localfield as lf
from app.services.localfield import LocalFieldElement
from app.services.nielsen import MarkedTuple
from app.services.psl2 import ProjectiveMatrix
from app.utils.logger import get_logger

logger = get_logger(__name__)

Letters = Tuple[int, ...]
ProjectivePoint = Tuple[LocalFieldElement, LocalFieldElement]


# ---------------------------------------------------------------------------
# Words in the generators: letter 2i is g_(i+1), letter 2i + 1 its inverse
# ---------------------------------------------------------------------------

def format_letters(word: Letters) -> str:
    return " ".join(f"g{letter // 2 + 1}" + ("^-1" if letter % 2 else "") for letter in word)


def parse_letters(text: str, k: int) -> Letters:
    letters = []
    for token in text.split():
        inverse = token.endswith("^-1")
        body = token[:-3] if inverse else token
        if not body.startswith("g") or not body[1:].isdigit():
            raise ParseError(f"malformed letter: {token!r}")
        index = int(body[1:])
        if not 1 <= index <= k:
            raise ParseError(f"generator index {index} outside 1..{k}")
        letters.append(2 * (index - 1) + int(inverse))
    if not letters:
        raise ParseError("empty word")
    return tuple(letters)


def evaluate(t: MarkedTuple, word: Letters) -> ProjectiveMatrix:
    alphabet = _alphabet(t)
    result = alphabet[word[0]]
    for letter in word[1:]:
        result = result.compose(alphabet[letter])
    return result


def _alphabet(t: MarkedTuple) -> List[ProjectiveMatrix]:
    out = []
    for entry in t.entries:
        out.append(entry)
        out.append(entry.inverse())
    return out


def enumerate_words(t: MarkedTuple, max_length: int, skipped: Optional[List[Letters]] = None) -> Iterator[Tuple[Letters, ProjectiveMatrix]]:
    """
    Reduced words with their values, in shortlex order.

    Words whose value runs out of precision are recorded in ``skipped`` and
    not extended.
    """
    alphabet = _alphabet(t)
    level: List[Tuple[Letters, ProjectiveMatrix]] = []
    for letter, value in enumerate(alphabet):
        level.append(((letter,), value))
        yield (letter,), value
    for _ in range(1, max_length):
        nxt = []
        for word, value in level:
            last = word[-1]
            for letter, generator in enumerate(alphabet):
                if letter == last ^ 1:
                    continue
                child = word + (letter,)
                try:
                    child_value = value.compose(generator)
                except PrecisionExhausted:
                    if skipped is not None:
                        skipped.append(child)
                    continue
                nxt.append((child, child_value))
                yield child, child_value
        level = nxt


# ---------------------------------------------------------------------------
# Witness checks
# ---------------------------------------------------------------------------

def power_exponent(p: int, level: int) -> int:
    """lcm(2p, p - 1, p + 1) p^(level - 1)."""
    return int(ilcm(2 * p, p - 1, p + 1)) * p ** (level - 1)


def _at_least(e: LocalFieldElement, level: int) -> Optional[bool]:
    """v(e) >= level, or None if undeterminable."""
    if e.is_zero:
        return True if e.prec >= level else None
    return e.v >= level


def _congruent_to_identity(g: ProjectiveMatrix, level: int) -> bool:
    """g = +-1 mod pi^level, provably from the known digits."""
    a, b, c, d = g.entries
    for sign in (1, -1):
        checks = [_at_least(b, level), _at_least(c, level), _at_least(a - sign, level), _at_least(d - sign, level)]
        if all(check is True for check in checks):
            return True
    return False


def _infinite_order_in_kernel(g: ProjectiveMatrix) -> bool:
    """For an element of the congruence kernel: provably of infinite order."""
    if g.spec.is_padic:
        return not g.is_identity()
    t = psl2.trace(g)
    return not (t * t - 4).is_zero


def check_congruence_witness(g: ProjectiveMatrix, level: int, exponent: int, vertex: bttree.LatticeVertex) -> bool:
    """
    g^exponent acts trivially on the level-ball around ``vertex`` and has infinite order.
    """
    local = g if vertex == bttree.base_vertex(g.spec) else bttree.localize(g, vertex)
    if not psl2.is_integral(local):
        return False
    powered = psl2.power(local, exponent)
    return _congruent_to_identity(powered, level) and _infinite_order_in_kernel(powered)


def fixed_points(g: ProjectiveMatrix) -> Tuple[ProjectivePoint, ProjectivePoint]:
    """
    The two fixed points on P^1(K) of a hyperbolic element.

    The eigenvalue of valuation v(tr g) is the fixed point of
    x -> tr - 1/x, a contraction near tr; the other one is its inverse.

    Raises:
        PrecisionExhausted: If an eigenvector cannot be separated from zero
    """
    t = psl2.trace(g)
    if t.is_zero or t.v >= 0:
        raise PrecisionExhausted("fixed points need a hyperbolic element")
    lam = t
    for _ in range(g.spec.precision + 2):
        nxt = t - lam.inv()
        if nxt.equals(lam) and nxt.relprec >= lam.relprec:
            lam = nxt
            break
        lam = nxt
    return _eigenvector(g, lam), _eigenvector(g, lam.inv())


def _eigenvector(g: ProjectiveMatrix, lam: LocalFieldElement) -> ProjectivePoint:
    a, b, c, d = g.entries
    first = (b, lam - a)
    if not (first[0].is_zero and first[1].is_zero):
        return first
    second = (lam - d, c)
    if not (second[0].is_zero and second[1].is_zero):
        return second
    raise PrecisionExhausted("eigenvector vanishes at tracked precision")


def points_distinct(points: Sequence[ProjectivePoint]) -> bool:
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            (x1, y1), (x2, y2) = points[i], points[j]
            if (x1 * y2 - x2 * y1).is_zero:
                return False
    return True


def _trace_candidates(value: LocalFieldElement) -> List[Tuple[bool, LocalFieldElement]]:
    if value.is_zero:
        return []
    if value.v != 0:
        return [(False, value)]
    shifted = value - lf.constant_term_lift(value)
    return [] if shifted.is_zero else [(True, shifted)]


def _combine(valuations: Sequence[int]) -> List[int]:
    """Integer exponents e_i with sum e_i v_i = gcd(v_i) (which must be +-1)."""
    exponents = [1]
    total = valuations[0]
    for value in valuations[1:]:
        x, y, g = igcdex(total, value)
        exponents = [int(x) * e for e in exponents] + [int(y)]
        total = int(g)
    if total < 0:
        exponents = [-e for e in exponents]
    return exponents


def trace_field_value(t: MarkedTuple, witness: TraceFieldWitness) -> LocalFieldElement:
    """Recompute the combined element of a trace-field witness."""
    spec = t[1].spec
    result = lf.one(spec)
    k = t.k
    for text, shifted, exponent in zip(witness.words, witness.shifted, witness.exponents):
        value = psl2.trace_adjoint(evaluate(t, parse_letters(text, k)))
        if shifted:
            value = value - lf.constant_term_lift(value)
        result = result * value.power(exponent)
    return result


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------

def _check_inputs(t: MarkedTuple, word_length: int, nd_level: int) -> FieldSpec:
    spec = t[1].spec
    errors = []
    if word_length < 1:
        errors.append("word_length must be >= 1")
    if not 1 <= nd_level < spec.precision:
        errors.append(f"nd_level must lie in [1, {spec.precision})")
    if errors:
        raise ConfigValidationError("; ".join(errors))
    return spec


def nondiscreteness_witness(t: MarkedTuple, word_length: int, nd_level: int) -> Optional[NonDiscretenessWitness]:
    """
    Search for a non-discreteness witness: first w = +-1 mod pi^m at the base
    vertex, then powers of elliptic words read at their fixed vertex.
    """
    spec = _check_inputs(t, word_length, nd_level)
    words = list(enumerate_words(t, word_length))
    return _nondiscrete_search(spec, words, nd_level)


def _nondiscrete_search(
    spec: FieldSpec, words: Sequence[Tuple[Letters, ProjectiveMatrix]], nd_level: int
) -> Optional[NonDiscretenessWitness]:
    base = bttree.base_vertex(spec)
    for word, value in words:
        try:
            if check_congruence_witness(value, nd_level, 1, base):
                return NonDiscretenessWitness(
                    word=format_letters(word), exponent=1, level=nd_level, base_vertex=base.encode()
                )
        except PrecisionExhausted:
            continue
    exponent = power_exponent(spec.p, nd_level)
    for word, value in words:
        try:
            if not value.classify().is_elliptic:
                continue
            vertex = bttree.midpoint(base, bttree.act(value, base))
            if check_congruence_witness(value, nd_level, exponent, vertex):
                return NonDiscretenessWitness(
                    word=format_letters(word), exponent=exponent, level=nd_level, base_vertex=vertex.encode()
                )
        except PrecisionExhausted:
            continue
    return None


def certify_dense(t: MarkedTuple, word_length: int = 6, nd_level: int = 1) -> DensityCertificate:
    """
    Search the reduced words of length <= word_length for the four witnesses.

    Args:
        t: Tuple of ProjectiveMatrix entries
        word_length: Word-length budget L
        nd_level: Congruence level m of the non-discreteness witness

    Returns:
        DensityCertificate, Certified only if every witness was found

    Raises:
        PrecisionExhausted: If every enumerated word ran out of precision
    """
    spec = _check_inputs(t, word_length, nd_level)
    skipped: List[Letters] = []
    words: List[Tuple[Letters, ProjectiveMatrix]] = []
    unbounded: Optional[UnboundednessWitness] = None
    zariski: Optional[ZariskiWitness] = None
    hyperbolic_points: List[Tuple[Letters, Tuple[ProjectivePoint, ProjectivePoint]]] = []
    trace_field: Optional[TraceFieldWitness] = TraceFieldWitness(automatic=True) if spec.is_padic else None
    chosen: List[Tuple[Letters, bool, int]] = []
    current_gcd = 0
    failures = 0

    for word, value in enumerate_words(t, word_length, skipped):
        words.append((word, value))
        try:
            cls = value.classify()
        except PrecisionExhausted:
            failures += 1
            continue
        if cls.is_hyperbolic:
            if unbounded is None:
                unbounded = UnboundednessWitness(word=format_letters(word), translation_length=cls.translation_length)
            if zariski is None:
                try:
                    points = fixed_points(value)
                except PrecisionExhausted:
                    points = None
                if points is not None:
                    for earlier, earlier_points in hyperbolic_points:
                        if points_distinct(earlier_points + points):
                            zariski = ZariskiWitness(words=[format_letters(earlier), format_letters(word)])
                            break
                    hyperbolic_points.append((word, points))
        if trace_field is None:
            for shifted, candidate in _trace_candidates(psl2.trace_adjoint(value)):
                valuation = int(candidate.v)
                updated = gcd(current_gcd, abs(valuation))
                if updated != current_gcd:
                    chosen.append((word, shifted, valuation))
                    current_gcd = updated
            if current_gcd == 1:
                exponents = _combine([v for _, _, v in chosen])
                trace_field = TraceFieldWitness(
                    words=[format_letters(w) for w, _, _ in chosen],
                    shifted=[s for _, s, _ in chosen],
                    exponents=exponents,
                    valuations=[v for _, _, v in chosen],
                )

    examined = len(words) + len(skipped)
    if examined and failures + len(skipped) == examined:
        raise PrecisionExhausted("every word ran out of precision", words=examined)

    nondiscrete = _nondiscrete_search(spec, words, nd_level)

    reasons = []
    if unbounded is None:
        reasons.append(NotCertifiedReason.BOUNDED)
    if nondiscrete is None:
        reasons.append(NotCertifiedReason.DISCRETE)
    if zariski is None:
        reasons.append(NotCertifiedReason.ZARISKI)
    if trace_field is None:
        reasons.append(NotCertifiedReason.TRACE_FIELD)
    certificate = DensityCertificate(
        status=CertificateStatus.NOT_CERTIFIED if reasons else CertificateStatus.CERTIFIED,
        reasons=reasons,
        field=spec.label(),
        word_length=word_length,
        nd_level=nd_level,
        unbounded=unbounded,
        nondiscrete=nondiscrete,
        zariski=zariski,
        trace_field=trace_field,
        words_examined=examined,
        words_skipped=failures + len(skipped),
    )
    logger.debug(
        "certification finished",
        status=certificate.status.value,
        reasons=[r.value for r in reasons],
        words=examined,
    )
    return certificate


def verify_certificate(t: MarkedTuple, certificate: DensityCertificate) -> bool:
    """
    Re-check every stored witness from the tuple alone.

    A Certified certificate verifies only if all four witnesses are present and valid.
    """
    spec = t[1].spec
    k = t.k
    try:
        if certificate.unbounded is not None:
            cls = evaluate(t, parse_letters(certificate.unbounded.word, k)).classify()
            if not cls.is_hyperbolic or cls.translation_length != certificate.unbounded.translation_length:
                return False
        if certificate.nondiscrete is not None:
            witness = certificate.nondiscrete
            value = evaluate(t, parse_letters(witness.word, k))
            vertex = bttree.decode(spec, witness.base_vertex)
            if not check_congruence_witness(value, witness.level, witness.exponent, vertex):
                return False
        if certificate.zariski is not None:
            first, second = (evaluate(t, parse_letters(w, k)) for w in certificate.zariski.words)
            if not (first.classify().is_hyperbolic and second.classify().is_hyperbolic):
                return False
            if not points_distinct(fixed_points(first) + fixed_points(second)):
                return False
        if certificate.trace_field is not None:
            if certificate.trace_field.automatic:
                if not spec.is_padic:
                    return False
            elif trace_field_value(t, certificate.trace_field).v != 1:
                return False
    except (PrecisionExhausted, ParseError):
        return False
    if certificate.certified:
        return None not in (certificate.unbounded, certificate.nondiscrete, certificate.zariski, certificate.trace_field)
    return True


# ---------------------------------------------------------------------------
# Text record
# ---------------------------------------------------------------------------

_LIST_SEPARATOR = " / "


def encode_certificate(certificate: DensityCertificate) -> str:
    """Serialize as ``key=value`` lines."""
    lines: Dict[str, str] = {
        "status": certificate.status.value,
        "reasons": ",".join(r.value for r in certificate.reasons),
        "field": certificate.field,
        "word_length": str(certificate.word_length),
        "nd_level": str(certificate.nd_level),
        "words_examined": str(certificate.words_examined),
        "words_skipped": str(certificate.words_skipped),
    }
    if certificate.unbounded:
        lines["unbounded.word"] = certificate.unbounded.word
        lines["unbounded.length"] = str(certificate.unbounded.translation_length)
    if certificate.nondiscrete:
        lines["nondiscrete.word"] = certificate.nondiscrete.word
        lines["nondiscrete.exponent"] = str(certificate.nondiscrete.exponent)
        lines["nondiscrete.level"] = str(certificate.nondiscrete.level)
        lines["nondiscrete.base_vertex"] = certificate.nondiscrete.base_vertex
    if certificate.zariski:
        lines["zariski.words"] = _LIST_SEPARATOR.join(certificate.zariski.words)
    if certificate.trace_field:
        tf = certificate.trace_field
        lines["trace_field.automatic"] = "true" if tf.automatic else "false"
        if not tf.automatic:
            lines["trace_field.words"] = _LIST_SEPARATOR.join(tf.words)
            lines["trace_field.shifted"] = ",".join("1" if s else "0" for s in tf.shifted)
            lines["trace_field.exponents"] = ",".join(str(e) for e in tf.exponents)
            lines["trace_field.valuations"] = ",".join(str(v) for v in tf.valuations)
    return "\n".join(f"{key}={value}" for key, value in lines.items())


def decode_certificate(text: str) -> DensityCertificate:
    """
    Parse the ``key=value`` record.

    Raises:
        ParseError: On malformed records
    """
    fields: Dict[str, str] = {}
    for line in text.strip().splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"malformed certificate line: {line!r}")
        fields[key.strip()] = value.strip()

    def ints(key: str) -> List[int]:
        raw = fields.get(key, "")
        return [int(x) for x in raw.split(",")] if raw else []

    try:
        data = {
            "status": fields["status"],
            "reasons": [r for r in fields.get("reasons", "").split(",") if r],
            "field": fields["field"],
            "word_length": int(fields["word_length"]),
            "nd_level": int(fields["nd_level"]),
            "words_examined": int(fields.get("words_examined", 0)),
            "words_skipped": int(fields.get("words_skipped", 0)),
        }
        if "unbounded.word" in fields:
            data["unbounded"] = {
                "word": fields["unbounded.word"],
                "translation_length": int(fields["unbounded.length"]),
            }
        if "nondiscrete.word" in fields:
            data["nondiscrete"] = {
                "word": fields["nondiscrete.word"],
                "exponent": int(fields["nondiscrete.exponent"]),
                "level": int(fields["nondiscrete.level"]),
                "base_vertex": fields["nondiscrete.base_vertex"],
            }
        if "zariski.words" in fields:
            data["zariski"] = {"words": fields["zariski.words"].split(_LIST_SEPARATOR)}
        if "trace_field.automatic" in fields:
            automatic = fields["trace_field.automatic"] == "true"
            tf = {"automatic": automatic}
            if not automatic:
                tf.update(
                    words=fields["trace_field.words"].split(_LIST_SEPARATOR),
                    shifted=[x == "1" for x in fields["trace_field.shifted"].split(",")],
                    exponents=ints("trace_field.exponents"),
                    valuations=ints("trace_field.valuations"),
                )
            data["trace_field"] = tf
        return DensityCertificate.model_validate(data)
    except (KeyError, ValueError) as e:
        raise ParseError(f"malformed certificate: {e}") from e
