"""
The Bruhat-Tits tree of PSL2(K).

A vertex is the homothety class of the lattice spanned by the columns of
[[pi^a, b], [0, pi^c]], scaled so that the lattice lies in O^2 but not in
pi O^2.  Then a, c >= 0, b is a digit string of length a (b mod pi^a), and
min(a, c, v(b)) = 0.  This primitive form is unique and its distance to the
base vertex O^2 is a + c.

The text encoding divides by pi^c, giving the form [[pi^m, b'], [0, 1]]
with m = a - c of either sign and b' known modulo pi^m.
"""

from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from app.exceptions import ParseError, PrecisionExhausted, RadiusTooLarge
from app.models.classification_models import IsometryClass
from app.models.field_models import FieldSpec
from app.services import localfield as lf
from app.services import psl2
from app.services.localfield import INF, LocalFieldElement
from app.services.psl2 import ProjectiveMatrix
from app.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class LatticeVertex:
    """Primitive upper-triangular form (a, c, b) of a lattice class."""

    spec: FieldSpec
    a: int
    c: int
    b: Tuple[int, ...]

    @property
    def m(self) -> int:
        return self.a - self.c

    @property
    def depth(self) -> int:
        """Distance to the base vertex."""
        return self.a + self.c

    def encode(self) -> str:
        return encode(self)

    def __str__(self) -> str:
        return encode(self)


def _digits_valuation(digits: Sequence[int]) -> int:
    for index, digit in enumerate(digits):
        if digit:
            return index
    return len(digits)


def _primitive(spec: FieldSpec, a: int, c: int, b: Sequence[int]) -> LatticeVertex:
    b = tuple(b[:a]) + (0,) * max(0, a - len(b))
    s = min(a, c, _digits_valuation(b))
    if s:
        a, c, b = a - s, c - s, b[s:]
    return LatticeVertex(spec, a, c, tuple(b))


def base_vertex(spec: FieldSpec) -> LatticeVertex:
    return LatticeVertex(spec, 0, 0, ())


def max_radius(spec: FieldSpec) -> int:
    return spec.precision - 2


def _check_radius(spec: FieldSpec, radius: int) -> None:
    if radius > max_radius(spec):
        raise RadiusTooLarge(radius=radius, max_radius=max_radius(spec))


# ---------------------------------------------------------------------------
# Combinatorics
# ---------------------------------------------------------------------------

def neighbors(v: LatticeVertex) -> List[LatticeVertex]:
    """The q + 1 neighbors: digit j appended for j = 0..p-1, then the upward one."""
    spec = v.spec
    out = [_primitive(spec, v.a + 1, v.c, v.b + (j,)) for j in range(spec.p)]
    out.append(_primitive(spec, v.a, v.c + 1, ((0,) + v.b)[: v.a]))
    return out


def parent(v: LatticeVertex) -> Optional[LatticeVertex]:
    """The neighbor one step closer to the base vertex."""
    if v.a > 0:
        return _primitive(v.spec, v.a - 1, v.c, v.b[: v.a - 1])
    if v.c > 0:
        return LatticeVertex(v.spec, 0, v.c - 1, ())
    return None


def _ancestors(v: LatticeVertex) -> List[LatticeVertex]:
    chain = [v]
    while True:
        up = parent(chain[-1])
        if up is None:
            return chain
        chain.append(up)


def dist(u: LatticeVertex, v: LatticeVertex) -> int:
    """
    Tree distance, from the elementary divisors of the change of basis.

    With B_u^-1 B_v = pi^-(a_u + c_u) [[pi^(c_u + a_v), pi^c_u b_v - pi^c_v b_u], [0, pi^(a_u + c_v)]]
    the smaller divisor exponent is the minimal entry valuation e1 and the
    two exponents sum to a_u + c_u + a_v + c_v.
    """
    spec = u.spec
    cap = min(u.c + v.a, u.a + v.c)
    if cap > 0:
        x = lf.raw_shift(spec, lf.raw_from_digits(spec, v.b, cap), u.c, cap)
        y = lf.raw_shift(spec, lf.raw_from_digits(spec, u.b, cap), v.c, cap)
        e1 = lf.raw_valuation(spec, lf.raw_sub(spec, x, y, cap), cap)
    else:
        e1 = 0
    return u.a + u.c + v.a + v.c - 2 * e1


def ball(center: LatticeVertex, radius: int) -> List[LatticeVertex]:
    """
    Vertices within the radius, in canonical BFS order.

    Raises:
        RadiusTooLarge: Beyond N - 2
    """
    return [v for layer in _layers(center, radius) for v in layer]


def _layers(center: LatticeVertex, radius: int) -> Iterator[List[LatticeVertex]]:
    _check_radius(center.spec, radius)
    seen = {center}
    layer = [center]
    yield layer
    for _ in range(radius):
        nxt = []
        for v in layer:
            for w in neighbors(v):
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        layer = nxt
        yield layer


def geodesic(u: LatticeVertex, v: LatticeVertex) -> List[LatticeVertex]:
    """Vertices of the path from u to v, both ends included."""
    up_u = _ancestors(u)
    up_v = _ancestors(v)
    index_v: Dict[LatticeVertex, int] = {w: i for i, w in enumerate(up_v)}
    for i, w in enumerate(up_u):
        if w in index_v:
            j = index_v[w]
            return up_u[: i + 1] + list(reversed(up_v[:j]))
    raise AssertionError("ancestor chains always meet at the base vertex")


def midpoint(u: LatticeVertex, v: LatticeVertex) -> LatticeVertex:
    path = geodesic(u, v)
    return path[(len(path) - 1) // 2]


# ---------------------------------------------------------------------------
# Action
# ---------------------------------------------------------------------------

def basis(v: LatticeVertex) -> psl2.Entries:
    """[[pi^a, b], [0, pi^c]] as row-major entries."""
    spec = v.spec
    return (
        lf.pi_power(spec, v.a),
        lf.from_digits(spec, v.b, 0, spec.precision),
        lf.zero(spec),
        lf.pi_power(spec, v.c),
    )


def _basis_inverse(v: LatticeVertex) -> psl2.Entries:
    spec = v.spec
    scale = lf.pi_power(spec, -(v.a + v.c))
    pa, b, _, pc = basis(v)
    return (pc * scale, b.neg() * scale, lf.zero(spec), pa * scale)


def localize(g: ProjectiveMatrix, v: LatticeVertex) -> ProjectiveMatrix:
    """B_v^-1 g B_v: g seen from the frame of v; integral iff g fixes v."""
    entries = psl2.mat_mul(psl2.mat_mul(_basis_inverse(v), g.entries), basis(v))
    return psl2.from_entries(g.spec, entries, check=False)


def transport(g: ProjectiveMatrix, v: LatticeVertex) -> ProjectiveMatrix:
    """B_v g B_v^-1: moves an element acting at the base vertex to act at v."""
    entries = psl2.mat_mul(psl2.mat_mul(basis(v), g.entries), _basis_inverse(v))
    return psl2.from_entries(g.spec, entries, check=False)


def _column_form(spec: FieldSpec, x1, y1, x2, y2, total: int) -> LatticeVertex:
    """Primitive form of the lattice spanned by (x1, y1), (x2, y2) with determinant valuation ``total``."""
    if y1.is_zero and y2.is_zero:
        raise PrecisionExhausted("lower row vanishes at tracked precision")
    if y1.is_zero or (not y2.is_zero and y2.v < y1.v):
        if y1.prec < y2.v:
            raise PrecisionExhausted("pivot valuation undeterminable", known_prec=y1.prec)
        x, y = x2, y2
    else:
        if y2.is_zero and y2.prec < y1.v:
            raise PrecisionExhausted("pivot valuation undeterminable", known_prec=y2.prec)
        x, y = x1, y1
    C = int(y.v)
    A = total - C
    B = x * lf.pi_power(spec, C) / y
    if B.prec < A:
        raise PrecisionExhausted("lattice entry undeterminable", known_prec=B.prec, needed=A)
    vb = A if B.is_zero or B.v >= A else int(B.v)
    s = min(A, C, vb)
    return LatticeVertex(spec, A - s, C - s, B.digit_window(s, A))


def act(g: ProjectiveMatrix, v: LatticeVertex) -> LatticeVertex:
    """
    Image of a vertex under g.

    Raises:
        PrecisionExhausted: When the column reduction cannot fix a pivot
    """
    spec = v.spec
    ga, gb, gc, gd = g.entries
    pa, b, _, pc = basis(v)
    x1, y1 = ga * pa, gc * pa
    x2, y2 = ga * b + gb * pc, gc * b + gd * pc
    return _column_form(spec, x1, y1, x2, y2, v.a + v.c)


def fixes(g: ProjectiveMatrix, v: LatticeVertex) -> bool:
    return act(g, v) == v


def displacement(g: ProjectiveMatrix, v: LatticeVertex) -> int:
    return dist(v, act(g, v))


def fixed_set_in_ball(g: ProjectiveMatrix, radius: int) -> List[LatticeVertex]:
    """Fixed vertices within the radius of the base vertex, in canonical order."""
    return [v for v in ball(base_vertex(g.spec), radius) if fixes(g, v)]


def displacement_oracle(g: ProjectiveMatrix, max_radius_: Optional[int] = None) -> IsometryClass:
    """
    Translation length as min d(x, gx), scanning growing balls around the base vertex.

    f(R) drops by 2 per unit of radius until the ball meets Min(g), so the
    scan stops at the first R with f(R + 1) = f(R).

    Raises:
        RadiusTooLarge: If f has not stabilized by N - 2
    """
    spec = g.spec
    limit = max_radius(spec) if max_radius_ is None else min(max_radius_, max_radius(spec))
    best = INF
    previous = INF
    center = base_vertex(spec)
    for radius, layer in enumerate(_layers(center, limit)):
        for v in layer:
            best = min(best, displacement(g, v))
            if best == 0:
                break
        if best == previous or best == 0:
            logger.debug("displacement oracle stabilized", radius=radius, length=best)
            return IsometryClass.elliptic() if best == 0 else IsometryClass.hyperbolic(int(best))
        previous = best
    raise RadiusTooLarge("displacement did not stabilize", radius=limit)


# ---------------------------------------------------------------------------
# Text encoding  m:<int>;b:<element>
# ---------------------------------------------------------------------------

def encode(v: LatticeVertex) -> str:
    b = lf.from_digits(v.spec, v.b, -v.c, v.m) if v.a else lf.zero(v.spec, v.m)
    return f"m:{v.m};b:{lf.encode(b)}"


def decode(spec: FieldSpec, text: str) -> LatticeVertex:
    head, sep, rest = text.strip().partition(";b:")
    if not sep or not head.startswith("m:"):
        raise ParseError("vertex encoding is m:<int>;b:<element>", text=text)
    try:
        m = int(head[2:])
    except ValueError as e:
        raise ParseError("vertex exponent must be an integer", text=text) from e
    b = lf.decode(spec, rest)
    if b.prec != m:
        raise ParseError("vertex entry must be known exactly modulo pi^m", text=text)
    vb = INF if b.is_zero else int(b.v)
    c = max(0, -m, -vb if vb != INF else 0)
    a = m + c
    return _primitive(spec, a, c, b.digit_window(-c, m) if a else ())
