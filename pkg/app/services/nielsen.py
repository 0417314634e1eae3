"""
Marked tuples and Nielsen moves.

Moves act on tuples by x_j -> x_j x_i^(+-1) (R), x_j -> x_i^(+-1) x_j (L) and
swaps (T).  A word is a sequence of moves applied left to right, written as
comma-separated tokens such as ``R+ 1 2, T 2 3``.  Indices are 1-based.
"""

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Any, FrozenSet, Hashable, Iterable, List, Optional, Protocol, Sequence, Tuple

from app import constants
from app.exceptions import (
    CommonFixedVertex,
    IndexOutOfRange,
    NoWitness,
    ParseError,
    ReductionFailed,
    WrongArity,
)
from app.models.classification_models import IsometryClass
from app.utils.logger import get_logger

logger = get_logger(__name__)


class GroupElement(Protocol):
    """What the tuple machinery needs from an ambient group."""

    def compose(self, other: Any) -> Any: ...

    def inverse(self) -> Any: ...

    def key(self) -> Hashable: ...

    def classify(self) -> IsometryClass: ...

    def fixed_vertices(self, radius: int) -> FrozenSet[Hashable]: ...

    def commutator_trace(self, other: Any) -> Any: ...


class MoveKind(str, Enum):
    R_PLUS = "R+"
    R_MINUS = "R-"
    L_PLUS = "L+"
    L_MINUS = "L-"
    T = "T"


_INVERSE_KIND = {
    MoveKind.R_PLUS: MoveKind.R_MINUS,
    MoveKind.R_MINUS: MoveKind.R_PLUS,
    MoveKind.L_PLUS: MoveKind.L_MINUS,
    MoveKind.L_MINUS: MoveKind.L_PLUS,
    MoveKind.T: MoveKind.T,
}


@dataclass(frozen=True, order=True)
class NielsenMove:
    kind: MoveKind
    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise IndexOutOfRange("a move needs two distinct indices", i=self.i, j=self.j)
        if self.kind is MoveKind.T and self.i > self.j:
            first, second = self.j, self.i
            object.__setattr__(self, "i", first)
            object.__setattr__(self, "j", second)

    def inverse(self) -> "NielsenMove":
        return NielsenMove(_INVERSE_KIND[self.kind], self.i, self.j)

    def __str__(self) -> str:
        return f"{self.kind.value} {self.i} {self.j}"


NielsenWord = Tuple[NielsenMove, ...]


def swap(i: int, j: int) -> NielsenMove:
    return NielsenMove(MoveKind.T, i, j)


@dataclass(frozen=True)
class MarkedTuple:
    """A k-tuple of group elements, read as a homomorphism from the free group F_k."""

    entries: Tuple[Any, ...]

    def __post_init__(self):
        if len(self.entries) < 1:
            raise WrongArity("a tuple needs at least one entry")
        object.__setattr__(self, "entries", tuple(self.entries))

    @property
    def k(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int):
        """1-based access."""
        if not 1 <= index <= self.k:
            raise IndexOutOfRange(index=index, k=self.k)
        return self.entries[index - 1]

    def key(self) -> Tuple[Hashable, ...]:
        return tuple(entry.key() for entry in self.entries)

    def project(self, indices: Sequence[int]) -> "MarkedTuple":
        """The projection onto the entries indexed by ``indices`` (1-based)."""
        return MarkedTuple(tuple(self[i] for i in indices))

    def classes(self) -> List[IsometryClass]:
        return [entry.classify() for entry in self.entries]


# ---------------------------------------------------------------------------
# Moves
# ---------------------------------------------------------------------------

def apply(move: NielsenMove, t: MarkedTuple) -> MarkedTuple:
    """
    Apply one Nielsen move.

    Raises:
        IndexOutOfRange: If an index is outside 1..k
    """
    k = t.k
    if not (1 <= move.i <= k and 1 <= move.j <= k):
        raise IndexOutOfRange(move=str(move), k=k)
    entries = list(t.entries)
    xi, xj = entries[move.i - 1], entries[move.j - 1]
    if move.kind is MoveKind.T:
        entries[move.i - 1], entries[move.j - 1] = xj, xi
    elif move.kind is MoveKind.R_PLUS:
        entries[move.j - 1] = xj.compose(xi)
    elif move.kind is MoveKind.R_MINUS:
        entries[move.j - 1] = xj.compose(xi.inverse())
    elif move.kind is MoveKind.L_PLUS:
        entries[move.j - 1] = xi.compose(xj)
    else:
        entries[move.j - 1] = xi.inverse().compose(xj)
    return MarkedTuple(tuple(entries))


def apply_word(word: Iterable[NielsenMove], t: MarkedTuple) -> MarkedTuple:
    for move in word:
        t = apply(move, t)
    return t


def inverse_word(word: Sequence[NielsenMove]) -> NielsenWord:
    return tuple(move.inverse() for move in reversed(word))


def generators(k: int) -> List[NielsenMove]:
    """Every Nielsen move on k-tuples, in canonical order."""
    moves = []
    for kind in (MoveKind.R_PLUS, MoveKind.R_MINUS, MoveKind.L_PLUS, MoveKind.L_MINUS):
        for i in range(1, k + 1):
            for j in range(1, k + 1):
                if i != j:
                    moves.append(NielsenMove(kind, i, j))
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            moves.append(swap(i, j))
    return moves


def fiber_moves(k: int) -> List[NielsenMove]:
    """Moves R+-_{1,i}, R+-_{2,i} (i >= 3), which keep the first two entries fixed."""
    moves = []
    for i in range(3, k + 1):
        for source in (1, 2):
            moves.append(NielsenMove(MoveKind.R_PLUS, source, i))
            moves.append(NielsenMove(MoveKind.R_MINUS, source, i))
    return moves


def format_word(word: Sequence[NielsenMove]) -> str:
    return (constants.WORD_SEPARATOR + " ").join(str(move) for move in word)


def parse_word(text: str) -> NielsenWord:
    """
    Parse ``R+ 1 2, T 2 3``; the empty string is the empty word.

    Raises:
        ParseError: On malformed tokens
    """
    moves = []
    for token in text.split(constants.WORD_SEPARATOR):
        token = token.strip()
        if not token:
            continue
        parts = token.split()
        if len(parts) != 3:
            raise ParseError(f"malformed move: {token!r}")
        try:
            kind = MoveKind(parts[0])
            i, j = int(parts[1]), int(parts[2])
        except ValueError as e:
            raise ParseError(f"malformed move: {token!r}") from e
        moves.append(NielsenMove(kind, i, j))
    return tuple(moves)


# ---------------------------------------------------------------------------
# Invariants and membership
# ---------------------------------------------------------------------------

def orbit_invariant_commutator_trace(t: MarkedTuple):
    """
    tr(a b a^-1 b^-1) for a pair of matrices.

    Raises:
        WrongArity: Unless k = 2
    """
    if t.k != 2:
        raise WrongArity("commutator trace needs a pair", k=t.k)
    return t[1].commutator_trace(t[2])


def membership_O(t: MarkedTuple, i: int, j: int) -> bool:
    """True iff entry i is elliptic and entry j is hyperbolic."""
    return t[i].classify().is_elliptic and t[j].classify().is_hyperbolic


# ---------------------------------------------------------------------------
# Reduction to an elliptic first entry
# ---------------------------------------------------------------------------

def _potential(classes: Sequence[IsometryClass]) -> Tuple[int, int]:
    lengths = [c.translation_length for c in classes]
    return (min(lengths), sum(lengths))


def reduce_to_elliptic(t: MarkedTuple, budget: int = 10_000) -> NielsenWord:
    """
    Best-first search for a word making the first entry elliptic.

    Nodes are ranked by (min translation length, total translation length,
    word length, word text), so the result does not depend on scheduling.
    Once some entry i is elliptic the word is closed with T_{1,i}.  The
    word is the first one reached under this ranking, which is not
    necessarily the shortest word that works.

    Raises:
        ReductionFailed: If ``budget`` nodes are expanded without success
    """
    moves = generators(t.k)
    classes = t.classes()
    start: NielsenWord = ()
    heap = [(_potential(classes), 0, "", start, t, classes)]
    seen = {t.key()}
    expanded = 0
    while heap:
        _, _, _, word, current, current_classes = heapq.heappop(heap)
        elliptic = [index for index, c in enumerate(current_classes, start=1) if c.is_elliptic]
        if elliptic:
            i = elliptic[0]
            result = word if i == 1 else word + (swap(1, i),)
            logger.debug("reduction found", nodes=expanded, word=format_word(result))
            return result
        if expanded >= budget:
            break
        expanded += 1
        for move in moves:
            child = apply(move, current)
            child_key = child.key()
            if child_key in seen:
                continue
            seen.add(child_key)
            child_word = word + (move,)
            child_classes = child.classes()
            heapq.heappush(
                heap,
                (_potential(child_classes), len(child_word), format_word(child_word), child_word, child, child_classes),
            )
    logger.info("reduction failed", budget=budget, nodes=expanded)
    raise ReductionFailed(budget=budget, nodes=expanded)


# ---------------------------------------------------------------------------
# Normalization into O = O_{1,2}
# ---------------------------------------------------------------------------

def normalize_to_O(t: MarkedTuple, scan_radius: int = 6) -> NielsenWord:
    """
    Nielsen word taking a tuple with elliptic first entry into O_{1,2}.

    A hyperbolic entry i >= 2 is swapped into position 2.  Otherwise the
    first i with x_i x_1 hyperbolic gives R+_{1,i} followed by T_{2,i}; if
    every such product is elliptic, a hyperbolic x_i x_j (i, j >= 2) gives
    R+_{j,i} and the swap.  When nothing is hyperbolic, the fixed sets of
    the entries are intersected within ``scan_radius``.

    Raises:
        ReductionFailed: If the first entry is not elliptic
        CommonFixedVertex: If all entries fix a common vertex in the scanned ball
        NoWitness: If no hyperbolic product exists and no common vertex is seen
    """
    k = t.k
    if k < 2:
        raise WrongArity("normalization needs k >= 2", k=k)
    classes = t.classes()
    if not classes[0].is_elliptic:
        raise ReductionFailed("first entry is not elliptic; reduce first")
    for i in range(2, k + 1):
        if classes[i - 1].is_hyperbolic:
            return () if i == 2 else (swap(2, i),)
    x1 = t[1]
    for i in range(2, k + 1):
        if t[i].compose(x1).classify().is_hyperbolic:
            move = NielsenMove(MoveKind.R_PLUS, 1, i)
            return (move,) if i == 2 else (move, swap(2, i))
    for i in range(2, k + 1):
        for j in range(2, k + 1):
            if i != j and t[i].compose(t[j]).classify().is_hyperbolic:
                move = NielsenMove(MoveKind.R_PLUS, j, i)
                return (move,) if i == 2 else (move, swap(2, i))
    common = None
    for entry in t.entries:
        fixed = entry.fixed_vertices(scan_radius)
        common = fixed if common is None else common & fixed
        if not common:
            break
    if common:
        witness = sorted(common)[0]
        raise CommonFixedVertex(vertex=str(witness), radius=scan_radius)
    raise NoWitness(radius=scan_radius)


def serre_index(t: MarkedTuple) -> Optional[int]:
    """First i >= 2 with x_i x_1 hyperbolic, or None."""
    x1 = t[1]
    for i in range(2, t.k + 1):
        if t[i].compose(x1).classify().is_hyperbolic:
            return i
    return None
