"""
Product replacement graphs over SL2(F_p) and PSL2(F_p).

Elements are indexed by their position in a sorted table of canonical
matrices, and k-tuples by the base-|G| number formed from their entries.
Nielsen orbits on all k-tuples are the connected components of the graph
spanned by T_{i,i+1}, R+_{1,2} and L+_{1,2}: these generate the whole
Nielsen group and, acting by permutations of a finite set, their orbits
need no inverse moves.
"""

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, TextIO, Tuple

import numpy as np
from sympy import isprime

from app.config import get_settings
from app.exceptions import BudgetExceeded, ConfigValidationError, NotInSL2, ParseError, WrongField
from app.models.census_models import FiniteGroupKind, OrbitRow, TupleOrbitReport
from app.models.classification_models import IsometryClass
from app.services.nielsen import MarkedTuple, apply, fiber_moves
from app.utils.logger import get_logger

logger = get_logger(__name__)

MAX_PRIME = 13
CHUNK = 1 << 20


def _sl_mul(x: np.ndarray, y: np.ndarray, p: int) -> np.ndarray:
    """Row-wise product of (..., 4) arrays of 2x2 matrices mod p."""
    a1, b1, c1, d1 = (x[..., i] for i in range(4))
    a2, b2, c2, d2 = (y[..., i] for i in range(4))
    return np.stack(
        [(a1 * a2 + b1 * c2) % p, (a1 * b2 + b1 * d2) % p, (c1 * a2 + d1 * c2) % p, (c1 * b2 + d1 * d2) % p],
        axis=-1,
    )


def _sl_inv(x: np.ndarray, p: int) -> np.ndarray:
    return np.stack([x[..., 3], (-x[..., 1]) % p, (-x[..., 2]) % p, x[..., 0]], axis=-1)


def _canonical(x: np.ndarray, p: int) -> np.ndarray:
    """Choose the sign whose first nonzero entry is at most (p - 1) / 2."""
    first = np.argmax(x != 0, axis=-1)
    lead = np.take_along_axis(x, first[..., None], axis=-1)[..., 0]
    flip = lead > (p - 1) // 2
    return np.where(flip[..., None], (-x) % p, x)


class FiniteMatrixGroup:
    """SL2(F_p) or PSL2(F_p) with full multiplication and inverse tables."""

    def __init__(self, kind: FiniteGroupKind, p: int):
        kind = FiniteGroupKind(kind)
        if p == 2 or not isprime(p) or p > MAX_PRIME:
            raise ConfigValidationError(f"p must be an odd prime <= {MAX_PRIME}", p=p)
        self.kind = kind
        self.p = p

        grid = np.indices((p,) * 4).reshape(4, -1).T
        det = (grid[:, 0] * grid[:, 3] - grid[:, 1] * grid[:, 2]) % p
        elements = grid[det == 1]
        if kind is FiniteGroupKind.PSL2:
            elements = elements[(_canonical(elements, p) == elements).all(axis=1)]
        self.elements = elements.astype(np.int64)

        self._lookup = np.full(p**4, -1, dtype=np.int64)
        self._lookup[self._codes(self.elements)] = np.arange(len(self.elements))

        expected = p * (p * p - 1) // (2 if kind is FiniteGroupKind.PSL2 else 1)
        if self.order != expected:
            raise AssertionError(f"group table has {self.order} elements, expected {expected}")
        self.identity = self.index_of((1, 0, 0, 1))
        logger.debug("finite group built", group=self.label, order=self.order)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def label(self) -> str:
        return f"{self.kind.value}(F_{self.p})"

    def _codes(self, x: np.ndarray) -> np.ndarray:
        p = self.p
        return ((x[..., 0] * p + x[..., 1]) * p + x[..., 2]) * p + x[..., 3]

    def _indices(self, x: np.ndarray) -> np.ndarray:
        if self.kind is FiniteGroupKind.PSL2:
            x = _canonical(x, self.p)
        return self._lookup[self._codes(x)]

    @cached_property
    def mul(self) -> np.ndarray:
        """mul[i, j] is the index of element i times element j."""
        n = self.order
        table = np.empty((n, n), dtype=np.int32)
        for i in range(n):
            table[i] = self._indices(_sl_mul(self.elements[i][None, :], self.elements, self.p))
        return table

    @cached_property
    def inv(self) -> np.ndarray:
        return self._indices(_sl_inv(self.elements, self.p)).astype(np.int32)

    def index_of(self, entries: Sequence[int]) -> int:
        """
        Index of the matrix [[a, b], [c, d]].

        Raises:
            NotInSL2: If ad - bc != 1 mod p
        """
        x = np.array([int(e) % self.p for e in entries], dtype=np.int64)
        if len(x) != 4:
            raise ParseError("a matrix has four entries", entries=list(entries))
        if (x[0] * x[3] - x[1] * x[2]) % self.p != 1:
            raise NotInSL2(entries=[int(e) for e in x])
        return int(self._indices(x))

    def element(self, entries: Sequence[int]) -> "FiniteElement":
        return FiniteElement(self, self.index_of(entries))

    def commutator_trace(self, x: int, y: int) -> int:
        """tr(x y x^-1 y^-1) computed from SL2 lifts."""
        gx, gy = self.elements[x], self.elements[y]
        c = _sl_mul(_sl_mul(gx, gy, self.p), _sl_mul(_sl_inv(gx, self.p), _sl_inv(gy, self.p), self.p), self.p)
        return int((c[0] + c[3]) % self.p)

    def commutator_traces(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        gx, gy = self.elements[x], self.elements[y]
        p = self.p
        c = _sl_mul(_sl_mul(gx, gy, p), _sl_mul(_sl_inv(gx, p), _sl_inv(gy, p), p), p)
        return (c[..., 0] + c[..., 3]) % p


@dataclass(frozen=True)
class FiniteElement:
    """An element of a FiniteMatrixGroup, usable as a Nielsen tuple entry."""

    group: FiniteMatrixGroup
    index: int

    @property
    def entries(self) -> Tuple[int, int, int, int]:
        return tuple(int(x) for x in self.group.elements[self.index])

    def compose(self, other: "FiniteElement") -> "FiniteElement":
        return FiniteElement(self.group, int(self.group.mul[self.index, other.index]))

    def inverse(self) -> "FiniteElement":
        return FiniteElement(self.group, int(self.group.inv[self.index]))

    def key(self) -> int:
        return self.index

    def classify(self) -> IsometryClass:
        """Finite-order elements have bounded orbits, hence are elliptic."""
        return IsometryClass.elliptic()

    def fixed_vertices(self, radius: int) -> FrozenSet[int]:
        raise WrongField("finite groups carry no tree action")

    def commutator_trace(self, other: "FiniteElement") -> int:
        return self.group.commutator_trace(self.index, other.index)

    def encode(self) -> str:
        return " ".join(str(x) for x in self.entries)

    def __str__(self) -> str:
        return self.encode()


def decode_tuple(group: FiniteMatrixGroup, text: str) -> MarkedTuple:
    """Parse ``a b c d | a b c d | ...``."""
    entries = []
    for part in text.split("|"):
        try:
            values = [int(x) for x in part.split()]
        except ValueError as e:
            raise ParseError(f"malformed matrix: {part!r}") from e
        entries.append(group.element(values))
    return MarkedTuple(tuple(entries))


# ---------------------------------------------------------------------------
# Subgroups
# ---------------------------------------------------------------------------

def subgroup(group: FiniteMatrixGroup, generators: Iterable[int]) -> np.ndarray:
    """Boolean membership mask of the subgroup generated by element indices."""
    gens = np.unique(np.asarray(list(generators), dtype=np.int64))
    member = np.zeros(group.order, dtype=bool)
    member[group.identity] = True
    frontier = np.array([group.identity], dtype=np.int64)
    mul = group.mul
    while frontier.size:
        images = np.unique(mul[np.ix_(frontier, gens)].ravel()) if gens.size else np.empty(0, dtype=np.int64)
        fresh = images[~member[images]]
        member[fresh] = True
        frontier = fresh
    return member


def is_generating(t: MarkedTuple) -> bool:
    """True iff the entries generate the whole finite group."""
    group = t[1].group
    return bool(subgroup(group, [e.index for e in t.entries]).all())


# ---------------------------------------------------------------------------
# Orbit census
# ---------------------------------------------------------------------------

def _digits(idx: np.ndarray, n: int, k: int) -> List[np.ndarray]:
    return [(idx // n ** (k - 1 - i)) % n for i in range(k)]


def _number(digits: Sequence[np.ndarray], n: int) -> np.ndarray:
    out = np.zeros_like(digits[0])
    for d in digits:
        out = out * n + d
    return out


def _move_images(group: FiniteMatrixGroup, k: int, idx: np.ndarray) -> List[np.ndarray]:
    n = group.order
    digits = _digits(idx, n, k)
    images = []
    for i in range(k - 1):
        swapped = list(digits)
        swapped[i], swapped[i + 1] = digits[i + 1], digits[i]
        images.append(_number(swapped, n))
    if k >= 2:
        right = list(digits)
        right[1] = group.mul[digits[1], digits[0]].astype(np.int64)
        left = list(digits)
        left[1] = group.mul[digits[0], digits[1]].astype(np.int64)
        images.extend([_number(right, n), _number(left, n)])
    return images


def _compress(parent: np.ndarray) -> None:
    while True:
        grand = parent[parent]
        if np.array_equal(grand, parent):
            return
        parent[:] = grand


def _components(group: FiniteMatrixGroup, k: int, total: int) -> np.ndarray:
    """Root (least tuple index) of the Nielsen orbit of every tuple."""
    dtype = np.int32 if total < 2**31 else np.int64
    parent = np.arange(total, dtype=dtype)
    rounds = 0
    while True:
        changed = False
        for start in range(0, total, CHUNK):
            idx = np.arange(start, min(start + CHUNK, total), dtype=np.int64)
            for image in _move_images(group, k, idx):
                ra, rb = parent[idx], parent[image]
                mask = ra != rb
                if mask.any():
                    changed = True
                    np.minimum.at(parent, np.maximum(ra[mask], rb[mask]), np.minimum(ra[mask], rb[mask]))
        _compress(parent)
        rounds += 1
        if not changed:
            logger.debug("union-find converged", rounds=rounds, tuples=total)
            return parent


def census_budget(allow_large: bool = False) -> int:
    settings = get_settings()
    return settings.large_census_tuples if allow_large else settings.max_census_tuples


def orbit_census(group: FiniteMatrixGroup, k: int, allow_large: bool = False) -> TupleOrbitReport:
    """
    Nielsen orbits on all k-tuples of the group.

    Args:
        group: Finite matrix group
        k: Tuple size
        allow_large: Use the large-census budget

    Returns:
        TupleOrbitReport with one row per orbit

    Raises:
        BudgetExceeded: If |G|^k exceeds the tuple budget
    """
    if k < 1:
        raise ConfigValidationError("k must be >= 1", k=k)
    n = group.order
    total = n**k
    budget = census_budget(allow_large)
    if total > budget:
        raise BudgetExceeded(
            f"census needs {n}^{k} = {total} tuples, budget is {budget}",
            required=total,
            budget=budget,
        )
    logger.info("census started", group=group.label, k=k, tuples=total)

    roots, sizes = np.unique(_components(group, k, total), return_counts=True)
    rows: List[OrbitRow] = []
    trace_classes: Optional[Dict[str, int]] = {} if k == 2 else None
    generating_tuples = 0
    orbit_sizes = []
    for orbit_id, (root, size) in enumerate(zip(roots.tolist(), sizes.tolist())):
        representative = [int(d[0]) for d in _digits(np.array([root], dtype=np.int64), n, k)]
        generating = bool(subgroup(group, representative).all())
        trace_class = None
        if k == 2:
            trace_class = group.commutator_trace(representative[0], representative[1])
        if generating:
            generating_tuples += size
            orbit_sizes.append(size)
            if trace_classes is not None:
                trace_classes[str(trace_class)] = trace_classes.get(str(trace_class), 0) + 1
        rows.append(
            OrbitRow(
                orbit_id=orbit_id, representative=representative, size=size, generating=generating, trace_class=trace_class
            )
        )

    report = TupleOrbitReport(
        group=group.label,
        kind=group.kind,
        p=group.p,
        k=k,
        group_order=n,
        total_tuples=total,
        generating_tuples=generating_tuples,
        non_generating_tuples=total - generating_tuples,
        orbit_count=len(orbit_sizes),
        orbit_sizes=orbit_sizes,
        non_generating_orbits=len(rows) - len(orbit_sizes),
        trace_classes=trace_classes,
        rows=rows,
    )
    logger.info("census finished", group=group.label, k=k, orbits=report.orbit_count)
    return report


def write_csv(report: TupleOrbitReport, stream: TextIO) -> None:
    """One orbit per row."""
    writer = csv.writer(stream)
    writer.writerow(["orbit_id", "size", "generating", "trace_class", "representative"])
    for row in report.rows:
        writer.writerow(
            [
                row.orbit_id,
                row.size,
                int(row.generating),
                "" if row.trace_class is None else row.trace_class,
                " ".join(str(x) for x in row.representative),
            ]
        )


def fiber_orbit(t: MarkedTuple) -> Set[Tuple[int, ...]]:
    """Keys of the orbit of t under the moves that keep the first two entries fixed."""
    moves = fiber_moves(t.k)
    seen = {t.key()}
    frontier = [t]
    while frontier:
        nxt = []
        for current in frontier:
            for move in moves:
                child = apply(move, current)
                key = child.key()
                if key not in seen:
                    seen.add(key)
                    nxt.append(child)
        frontier = nxt
    return seen
