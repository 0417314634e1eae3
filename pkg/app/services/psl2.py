"""
PSL2(K): canonical matrices, traces, classification and samplers.
"""

from dataclasses import dataclass
from typing import FrozenSet, Optional, Sequence, Tuple

import numpy as np
from sympy import legendre_symbol

from app import constants
from app.exceptions import NotAUnit, NotInSL2, ParseError, PrecisionExhausted
from app.models.classification_models import IsometryClass
from app.models.field_models import FieldSpec
from app.services import localfield as lf
from app.services.localfield import LocalFieldElement

Entries = Tuple[LocalFieldElement, LocalFieldElement, LocalFieldElement, LocalFieldElement]


def mat_mul(x: Sequence[LocalFieldElement], y: Sequence[LocalFieldElement]) -> Entries:
    """Product of two 2x2 matrices given row-major as (a, b, c, d)."""
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
    )


def _canonical_sign(spec: FieldSpec, entries: Sequence[LocalFieldElement]) -> Entries:
    nonzero = [e for e in entries if not e.is_zero]
    if not nonzero:
        raise PrecisionExhausted("every matrix entry is zero at the tracked precision")
    lowest = min(e.v for e in nonzero)
    lead = next(e for e in nonzero if e.v == lowest)
    if lead.leading_digit > (spec.p - 1) // 2:
        return tuple(e.neg() for e in entries)
    return tuple(entries)


def determinant_residual(entries: Sequence[LocalFieldElement]) -> LocalFieldElement:
    a, b, c, d = entries
    return a * d - b * c - 1


@dataclass(frozen=True)
class ProjectiveMatrix:
    """An element of PSL2(K), stored as the canonical one of its two SL2 lifts."""

    spec: FieldSpec
    a: LocalFieldElement
    b: LocalFieldElement
    c: LocalFieldElement
    d: LocalFieldElement

    @property
    def entries(self) -> Entries:
        return (self.a, self.b, self.c, self.d)

    # -- group structure ----------------------------------------------------

    def compose(self, other: "ProjectiveMatrix") -> "ProjectiveMatrix":
        return compose(self, other)

    def inverse(self) -> "ProjectiveMatrix":
        return invert(self)

    def power(self, n: int) -> "ProjectiveMatrix":
        return power(self, n)

    def key(self) -> str:
        return encode(self)

    def is_identity(self) -> bool:
        """Equal to the identity up to the known precision of every entry."""
        a, b, c, d = self.entries
        if not (b.is_zero and c.is_zero):
            return False
        return ((a - 1).is_zero and (d - 1).is_zero) or ((a + 1).is_zero and (d + 1).is_zero)

    def equals(self, other: "ProjectiveMatrix") -> bool:
        plus = all(x.sub(y).is_zero for x, y in zip(self.entries, other.entries))
        return plus or all(x.add(y).is_zero for x, y in zip(self.entries, other.entries))

    # -- invariants ---------------------------------------------------------

    def trace(self) -> LocalFieldElement:
        return trace(self)

    def trace_adjoint(self) -> LocalFieldElement:
        return trace_adjoint(self)

    def classify(self) -> IsometryClass:
        return classify(self)

    def translation_length(self) -> int:
        return classify(self).translation_length

    def commutator_trace(self, other: "ProjectiveMatrix") -> LocalFieldElement:
        return commutator_trace(self, other)

    def fixed_vertices(self, radius: int) -> FrozenSet[str]:
        """Encodings of the fixed vertices in the ball of the given radius around the base vertex."""
        from app.services import bttree

        return frozenset(v.encode() for v in bttree.fixed_set_in_ball(self, radius))

    def residue(self) -> Tuple[int, int, int, int]:
        return residue(self)

    def encode(self) -> str:
        return encode(self)

    def __str__(self) -> str:
        return encode(self)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def from_entries(spec: FieldSpec, entries: Sequence, check: bool = True) -> ProjectiveMatrix:
    """
    Build a canonical matrix.

    Args:
        spec: Field
        entries: (a, b, c, d) as elements or integers
        check: Verify ad - bc = 1 at the tracked precision

    Returns:
        ProjectiveMatrix with the canonical sign

    Raises:
        NotInSL2: If the determinant provably differs from 1
        PrecisionExhausted: If every entry is zero at precision
    """
    values = tuple(e if isinstance(e, LocalFieldElement) else lf.from_int(spec, e) for e in entries)
    if len(values) != 4:
        raise ParseError("a matrix needs four entries", count=len(values))
    if check:
        residual = determinant_residual(values)
        if not residual.is_zero:
            raise NotInSL2(residual=residual.encode())
    return ProjectiveMatrix(spec, *_canonical_sign(spec, values))


def identity(spec: FieldSpec) -> ProjectiveMatrix:
    return from_entries(spec, (1, 0, 0, 1), check=False)


def diagonal(spec: FieldSpec, m: int) -> ProjectiveMatrix:
    """diag(pi^m, pi^-m)."""
    return from_entries(spec, (lf.pi_power(spec, m), 0, 0, lf.pi_power(spec, -m)), check=False)


def unipotent(spec: FieldSpec, x: LocalFieldElement, lower: bool = False) -> ProjectiveMatrix:
    if lower:
        return from_entries(spec, (1, 0, x, 1), check=False)
    return from_entries(spec, (1, x, 0, 1), check=False)


def rotation(spec: FieldSpec) -> ProjectiveMatrix:
    """
    [[0, -1], [1, t]] with t^2 - 4 a non-square mod p.

    Its characteristic polynomial is irreducible mod pi, so the base vertex
    is its only fixed vertex.
    """
    p = spec.p
    t = next(t for t in range(p) if legendre_symbol((t * t - 4) % p, p) == -1)
    return from_entries(spec, (0, -1, 1, t), check=False)


def conjugate_by_diagonal(g: ProjectiveMatrix, m: int) -> ProjectiveMatrix:
    """diag(pi^m, 1) g diag(pi^-m, 1); moves fixed points from v to diag(pi^m, 1) v."""
    spec = g.spec
    return from_entries(
        spec,
        (g.a, g.b * lf.pi_power(spec, m), g.c * lf.pi_power(spec, -m), g.d),
        check=False,
    )


def embed_subfield(g: ProjectiveMatrix, m: int) -> ProjectiveMatrix:
    """Apply t -> t^m to every entry (Laurent series fields only)."""
    entries = tuple(lf.substitute_power(e, m) for e in g.entries)
    return from_entries(g.spec, entries, check=False)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def compose(g: ProjectiveMatrix, h: ProjectiveMatrix) -> ProjectiveMatrix:
    return from_entries(g.spec, mat_mul(g.entries, h.entries))


def invert(g: ProjectiveMatrix) -> ProjectiveMatrix:
    return from_entries(g.spec, (g.d, g.b.neg(), g.c.neg(), g.a), check=False)


def power(g: ProjectiveMatrix, n: int) -> ProjectiveMatrix:
    if n < 0:
        return power(invert(g), -n)
    result = identity(g.spec)
    base = g
    while n:
        if n & 1:
            result = compose(result, base)
        n >>= 1
        if n:
            base = compose(base, base)
    return result


def conjugate(g: ProjectiveMatrix, h: ProjectiveMatrix) -> ProjectiveMatrix:
    """h g h^-1."""
    return compose(compose(h, g), invert(h))


def trace(g: ProjectiveMatrix) -> LocalFieldElement:
    return g.a + g.d


def trace_adjoint(g: ProjectiveMatrix) -> LocalFieldElement:
    """tr(g)^2 - 1, the trace of the adjoint representation."""
    t = trace(g)
    return t * t - 1


def adjoint_matrix(g: ProjectiveMatrix) -> Tuple[Tuple[LocalFieldElement, ...], ...]:
    """
    Matrix of X -> g X g^-1 on sl2 in the basis (e, h, f), rows indexed by e, h, f.
    """
    a, b, c, d = g.entries
    two = lf.from_int(g.spec, 2)
    return (
        (a * a, -(two * a * b), -(b * b)),
        (-(a * c), a * d + b * c, b * d),
        (-(c * c), two * c * d, d * d),
    )


def commutator_trace(g: ProjectiveMatrix, h: ProjectiveMatrix) -> LocalFieldElement:
    """tr(g h g^-1 h^-1); independent of the lifts chosen."""
    g_inv = (g.d, g.b.neg(), g.c.neg(), g.a)
    h_inv = (h.d, h.b.neg(), h.c.neg(), h.a)
    product = mat_mul(mat_mul(g.entries, h.entries), mat_mul(g_inv, h_inv))
    return product[0] + product[3]


def trace_valuation(g: ProjectiveMatrix) -> Optional[int]:
    t = trace(g)
    return None if t.is_zero else int(t.v)


def classify(g: ProjectiveMatrix) -> IsometryClass:
    """
    Elliptic iff v(tr g) >= 0, otherwise hyperbolic with length -2 v(tr g).

    Raises:
        PrecisionExhausted: If the trace is zero at a precision that does not reach O
    """
    t = trace(g)
    if t.is_zero:
        if t.prec <= 0:
            raise PrecisionExhausted("trace valuation undeterminable", known_prec=t.prec)
        return IsometryClass.elliptic()
    if t.v >= 0:
        return IsometryClass.elliptic()
    return IsometryClass.hyperbolic(int(-2 * t.v))


def residue(g: ProjectiveMatrix) -> Tuple[int, int, int, int]:
    """Reduction mod pi of an element of PSL2(O), with the residue sign rule applied."""
    values = [e.residue() for e in g.entries]
    p = g.spec.p
    lead = next(x for x in values if x)
    if lead > (p - 1) // 2:
        values = [(-x) % p for x in values]
    return tuple(values)


def is_integral(g: ProjectiveMatrix) -> bool:
    return all(e.is_integral for e in g.entries)


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def sample_compact(spec: FieldSpec, rng: np.random.Generator) -> ProjectiveMatrix:
    """
    Haar-uniform element of PSL2(O) truncated at precision N.

    A uniform primitive row (a, b) is completed by a uniform solution of
    ad - bc = 1, parametrized by the free coordinate.
    """
    while True:
        a = lf.sample_integral(spec, rng)
        b = lf.sample_integral(spec, rng)
        if a.v == 0 or b.v == 0:
            break
    free = lf.sample_integral(spec, rng)
    if a.v == 0:
        c = free
        d = (b * c + 1) / a
    else:
        d = free
        c = (a * d - 1) / b
    return from_entries(spec, (a, b, c, d))


def sample_half_length(rng: np.random.Generator, length_law: float, max_translation: Optional[int] = None) -> int:
    m = int(rng.geometric(length_law))
    if max_translation is not None:
        m = min(m, max_translation)
    return m


def sample_hyperbolic(
    spec: FieldSpec,
    rng: np.random.Generator,
    length_law: float = 0.5,
    m: Optional[int] = None,
    max_translation: Optional[int] = None,
) -> ProjectiveMatrix:
    """
    k1 diag(pi^m, pi^-m) k2 with k1, k2 Haar on PSL2(O), conditioned on length 2m.

    Args:
        spec: Field
        rng: Random generator
        length_law: Parameter of the geometric law of m
        m: Fixed half translation length, sampled when None
        max_translation: Cap on the sampled m

    Returns:
        Hyperbolic element with translation length 2m
    """
    if m is None:
        m = sample_half_length(rng, length_law, max_translation)
    middle = diagonal(spec, m)
    while True:
        g = compose(compose(sample_compact(spec, rng), middle), sample_compact(spec, rng))
        if classify(g).translation_length == 2 * m:
            return g


def sample_elliptic(spec: FieldSpec, rng: np.random.Generator) -> ProjectiveMatrix:
    """h u h^-1 with u Haar on PSL2(O) and h a hyperbolic-times-compact word."""
    h = compose(sample_hyperbolic(spec, rng, m=1), sample_compact(spec, rng))
    return conjugate(sample_compact(spec, rng), h)


def sample_rotation(spec: FieldSpec, rng: np.random.Generator) -> ProjectiveMatrix:
    """A random conjugate of ``rotation`` inside PSL2(O); fixes only the base vertex."""
    return conjugate(rotation(spec), sample_compact(spec, rng))


def elliptic_pair(
    spec: FieldSpec, rng: np.random.Generator, distance: int
) -> Tuple[ProjectiveMatrix, ProjectiveMatrix]:
    """
    Two elliptic elements with single fixed vertices at the given distance.

    The product of the pair is hyperbolic with translation length 2 * distance.
    """
    first = sample_rotation(spec, rng)
    second = conjugate_by_diagonal(sample_rotation(spec, rng), distance)
    k = sample_compact(spec, rng)
    return conjugate(first, k), conjugate(second, k)


# ---------------------------------------------------------------------------
# Text encoding: four element encodings joined by '|'
# ---------------------------------------------------------------------------

def encode(g: ProjectiveMatrix) -> str:
    return constants.ELEMENT_SEPARATOR.join(lf.encode(e) for e in g.entries)


def decode(spec: FieldSpec, text: str, check: bool = True) -> ProjectiveMatrix:
    """
    Parse a matrix and canonicalize its sign.

    Raises:
        ParseError: On malformed input
        NotInSL2: If the determinant is not 1 at precision
    """
    parts = text.strip().split(constants.ELEMENT_SEPARATOR)
    if len(parts) != 4:
        raise ParseError("a matrix is four element encodings joined by '|'", text=text)
    return from_entries(spec, [lf.decode(spec, part) for part in parts], check=check)


def from_integers(spec: FieldSpec, entries: Sequence[int]) -> ProjectiveMatrix:
    return from_entries(spec, [lf.from_int(spec, int(x)) for x in entries])


def require_integral(g: ProjectiveMatrix) -> ProjectiveMatrix:
    if not is_integral(g):
        raise NotAUnit("matrix is not in PSL2(O)", matrix=encode(g))
    return g
