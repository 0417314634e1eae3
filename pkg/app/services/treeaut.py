"""
Finite-depth portraits of automorphisms of the (q+1)-regular tree.

Vertices are reduced color words over {0, ..., q} (no letter repeated twice
in a row); the empty word is the base vertex and the edge between w and w+c
has color c.  All words up to some radius are numbered once per q in BFS
order (shorter first, children by ascending color), and a portrait stores
the index of g(w) for every word w of length at most its depth.  The
numbering of a smaller radius is a prefix of the numbering of a larger one,
so one shared table serves every portrait of the same q.
"""

from dataclasses import dataclass
from threading import Lock
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from app.config import get_settings
from app.exceptions import BudgetExceeded, DepthExhausted, ParseError, WrongField
from app.models.classification_models import IsometryClass
from app.utils.logger import get_logger

logger = get_logger(__name__)

ROOT_TOKEN = "."


# ---------------------------------------------------------------------------
# Word enumeration
# ---------------------------------------------------------------------------

@dataclass
class WordTable:
    """BFS numbering of reduced color words up to ``radius``."""

    q: int
    radius: int
    length: np.ndarray
    parent: np.ndarray
    last: np.ndarray
    neighbor: np.ndarray
    offsets: np.ndarray

    def size(self, radius: int) -> int:
        """Number of words of length at most ``radius``."""
        return int(self.offsets[radius + 1])

    def level(self, n: int) -> np.ndarray:
        return np.arange(self.offsets[n], self.offsets[n + 1])

    def word(self, index: int) -> Tuple[int, ...]:
        letters = []
        while index > 0:
            letters.append(int(self.last[index]))
            index = int(self.parent[index])
        return tuple(reversed(letters))

    def index(self, word: Sequence[int]) -> int:
        current = 0
        for color in word:
            if not 0 <= color <= self.q:
                raise ParseError(f"color {color} outside 0..{self.q}")
            if current and self.last[current] == color:
                raise ParseError("color word is not reduced", word="".join(map(str, word)))
            current = int(self.neighbor[current, color])
            if current < 0:
                raise DepthExhausted("word longer than the enumerated radius", radius=self.radius)
        return current


def ball_size(q: int, radius: int) -> int:
    return 1 + (q + 1) * (q ** radius - 1) // (q - 1)


def _build_table(q: int, radius: int) -> WordTable:
    colors = q + 1
    lengths = [np.zeros(1, dtype=np.int64)]
    parents = [np.full(1, -1, dtype=np.int64)]
    lasts = [np.full(1, -1, dtype=np.int64)]
    offsets = [0, 1]
    if radius >= 1:
        lengths.append(np.ones(colors, dtype=np.int64))
        parents.append(np.zeros(colors, dtype=np.int64))
        lasts.append(np.arange(colors, dtype=np.int64))
        offsets.append(1 + colors)
    for n in range(2, radius + 1):
        prev = np.arange(offsets[n - 1], offsets[n])
        prev_last = lasts[n - 1]
        grid = np.tile(np.arange(colors), (len(prev), 1))
        child_colors = grid[grid != prev_last[:, None]].reshape(len(prev), q)
        lengths.append(np.full(len(prev) * q, n, dtype=np.int64))
        parents.append(np.repeat(prev, q))
        lasts.append(child_colors.reshape(-1))
        offsets.append(offsets[-1] + len(prev) * q)
    length = np.concatenate(lengths)
    parent = np.concatenate(parents)
    last = np.concatenate(lasts)
    total = len(length)
    neighbor = np.full((total, colors), -1, dtype=np.int64)
    children = np.arange(1, total)
    neighbor[children, last[children]] = parent[children]
    neighbor[parent[children], last[children]] = children
    return WordTable(q, radius, length, parent, last, neighbor, np.asarray(offsets, dtype=np.int64))


_tables: Dict[int, WordTable] = {}
_tables_lock = Lock()


def word_table(q: int, radius: int) -> WordTable:
    """
    Shared numbering covering at least ``radius``.

    Raises:
        BudgetExceeded: If the numbering would exceed the portrait vertex budget
    """
    if q < 2:
        raise ParseError("trees of degree q + 1 need q >= 2", q=q)
    with _tables_lock:
        table = _tables.get(q)
        if table is None or table.radius < radius:
            budget = get_settings().max_portrait_vertices
            needed = ball_size(q, radius)
            if needed > budget:
                raise BudgetExceeded(
                    f"radius {radius} needs {needed} word vertices, budget is {budget}",
                    required=needed,
                    budget=budget,
                )
            logger.debug("building word table", q=q, radius=radius, vertices=needed)
            table = _build_table(q, radius)
            _tables[q] = table
        return table


def word_distance(table: WordTable, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Tree distance between word indices, elementwise."""
    u = np.array(u, dtype=np.int64, copy=True)
    v = np.array(v, dtype=np.int64, copy=True)
    out = np.zeros(u.shape, dtype=np.int64)
    while True:
        differ = u != v
        if not differ.any():
            return out
        lu = table.length[u]
        lv = table.length[v]
        up_u = differ & (lu >= lv)
        up_v = differ & (lv >= lu)
        u[up_u] = table.parent[u[up_u]]
        v[up_v] = table.parent[v[up_v]]
        out += up_u.astype(np.int64) + up_v.astype(np.int64)


def format_word(word: Sequence[int]) -> str:
    return "".join(str(c) for c in word) or ROOT_TOKEN


def parse_word(text: str) -> Tuple[int, ...]:
    text = text.strip()
    if text == ROOT_TOKEN:
        return ()
    if not text.isdigit():
        raise ParseError(f"not a color word: {text!r}")
    return tuple(int(ch) for ch in text)


# ---------------------------------------------------------------------------
# Portraits
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TreePortrait:
    """Images of every word of length <= depth, as indices into the shared word table."""

    q: int
    depth: int
    images: np.ndarray

    @property
    def table(self) -> WordTable:
        return word_table(self.q, self.depth + self.root_distance)

    @property
    def root_distance(self) -> int:
        """d0: distance from the base vertex to its image."""
        return int(word_table(self.q, 0).length[self.images[0]])

    @property
    def preserves_parity(self) -> bool:
        """Membership in Aut0: the bipartition is preserved iff d0 is even."""
        return self.root_distance % 2 == 0

    def key(self) -> Tuple[int, int, bytes]:
        return (self.q, self.depth, self.images.tobytes())

    def __eq__(self, other) -> bool:
        return isinstance(other, TreePortrait) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def compose(self, other: "TreePortrait") -> "TreePortrait":
        return compose(self, other)

    def inverse(self) -> "TreePortrait":
        return invert(self)

    def classify(self) -> IsometryClass:
        return classify_portrait(self)

    def fixed_vertices(self, radius: int) -> FrozenSet[str]:
        table = self.table
        return frozenset(format_word(table.word(int(i))) for i in fixed_set_in_ball(self, radius))

    def commutator_trace(self, other: "TreePortrait"):
        raise WrongField("commutator traces need matrix entries")

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.images, np.arange(len(self.images))))

    def restrict(self, depth: int) -> "TreePortrait":
        return restrict(self, depth)

    def encode(self) -> str:
        return encode(self)


def _check_depth(depth: int, operation: str) -> None:
    if depth < 1:
        raise DepthExhausted(f"{operation} leaves depth {depth}", depth=depth)


def restrict(g: TreePortrait, depth: int) -> TreePortrait:
    if depth > g.depth:
        raise DepthExhausted("cannot extend a portrait", depth=g.depth, requested=depth)
    _check_depth(depth, "restrict")
    table = word_table(g.q, g.depth + g.root_distance)
    return TreePortrait(g.q, depth, g.images[: table.size(depth)].copy())


def identity(q: int, depth: int) -> TreePortrait:
    table = word_table(q, depth)
    return TreePortrait(q, depth, np.arange(table.size(depth), dtype=np.int64))


def compose(g: TreePortrait, h: TreePortrait) -> TreePortrait:
    """
    g after h, with depth min(depth(h), depth(g) - d0(h)).

    Raises:
        DepthExhausted: If the resulting depth is below 1
    """
    if g.q != h.q:
        raise WrongField("portraits of different trees", left=g.q, right=h.q)
    depth = min(h.depth, g.depth - h.root_distance)
    _check_depth(depth, "compose")
    table = word_table(g.q, depth + h.root_distance + g.root_distance)
    images = g.images[h.images[: table.size(depth)]]
    return TreePortrait(g.q, depth, images)


def invert(g: TreePortrait) -> TreePortrait:
    """
    Inverse, known to depth(g) - d0(g).

    Raises:
        DepthExhausted: If that depth is below 1
    """
    d0 = g.root_distance
    depth = g.depth - d0
    _check_depth(depth, "invert")
    table = word_table(g.q, g.depth + d0)
    preimage = np.full(table.size(g.depth + d0), -1, dtype=np.int64)
    preimage[g.images] = np.arange(len(g.images), dtype=np.int64)
    images = preimage[: table.size(depth)]
    if (images < 0).any():
        raise DepthExhausted("portrait image does not cover the inverse ball", depth=depth)
    return TreePortrait(g.q, depth, images)


def is_consistent(g: TreePortrait) -> bool:
    """Injective and adjacency preserving on the whole portrait."""
    table = word_table(g.q, g.depth + g.root_distance)
    if len(np.unique(g.images)) != len(g.images):
        return False
    children = np.arange(1, len(g.images))
    distance = word_distance(table, g.images[children], g.images[table.parent[children]])
    return bool((distance == 1).all())


def _extend(
    q: int,
    depth: int,
    root_image: int,
    root_colors: np.ndarray,
    rng: Optional[np.random.Generator],
) -> TreePortrait:
    """
    Build a portrait level by level from the image of the root and its color bijection.

    Below the root each vertex gets a uniform bijection between its q child
    colors and the q colors at its image other than the one pointing back;
    with ``rng=None`` child color c goes to color c (color preserving).
    """
    table = word_table(q, depth + int(word_table(q, 0).length[root_image]))
    images = np.full(table.size(depth), -1, dtype=np.int64)
    images[0] = root_image
    if depth >= 1:
        images[table.level(1)] = table.neighbor[root_image, root_colors]
    colors = q + 1
    for n in range(1, depth):
        words = table.level(n)
        count = len(words)
        img = images[words]
        img_parent = images[table.parent[words]]
        back = np.where(table.parent[img] == img_parent, table.last[img], table.last[img_parent])
        grid = np.tile(np.arange(colors), (count, 1))
        child_colors = grid[grid != table.last[words][:, None]].reshape(count, q)
        free_colors = grid[grid != back[:, None]].reshape(count, q)
        if rng is None:
            chosen = free_colors
        else:
            order = rng.permuted(np.tile(np.arange(q), (count, 1)), axis=1)
            chosen = np.take_along_axis(free_colors, order, axis=1)
        child_index = table.neighbor[words[:, None], child_colors]
        images[child_index.reshape(-1)] = table.neighbor[img[:, None], chosen].reshape(-1)
    if (images < 0).any():
        raise DepthExhausted("word table too small for portrait", depth=depth)
    return TreePortrait(q, depth, images)


def left_multiplication(q: int, word: Sequence[int], depth: int) -> TreePortrait:
    """The color-preserving automorphism w -> reduce(word . w)."""
    table = word_table(q, depth + len(word))
    return _extend(q, depth, table.index(word), np.arange(q + 1), None)


def shift(q: int, m: int, depth: int) -> TreePortrait:
    """Translation by 2m along the axis of alternating colors 0, 1."""
    return left_multiplication(q, (0, 1) * m, depth)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def displacement_profile(g: TreePortrait, radius: int) -> List[int]:
    """f(R) = min d(w, g w) over words of length <= R, for R = 0..radius."""
    if radius > g.depth:
        raise DepthExhausted("radius beyond portrait depth", depth=g.depth, radius=radius)
    table = word_table(g.q, g.depth + g.root_distance)
    n = table.size(radius)
    moved = word_distance(table, np.arange(n), g.images[:n])
    return [int(moved[: table.size(r)].min()) for r in range(radius + 1)]


def classify_portrait(g: TreePortrait) -> IsometryClass:
    """
    Radius-expansion oracle over word vertices.

    Raises:
        DepthExhausted: If f(R + 1) = f(R) never happens within the depth
    """
    table = word_table(g.q, g.depth + g.root_distance)
    n = table.size(g.depth)
    moved = word_distance(table, np.arange(n), g.images[:n])
    previous = None
    for radius in range(g.depth + 1):
        best = int(moved[: table.size(radius)].min())
        if best == 0 or best == previous:
            return IsometryClass.elliptic() if best == 0 else IsometryClass.hyperbolic(best)
        previous = best
    raise DepthExhausted("displacement did not stabilize within the portrait depth", depth=g.depth)


def fixed_set_in_ball(g: TreePortrait, radius: int) -> np.ndarray:
    """Indices of fixed words of length <= radius."""
    if radius > g.depth:
        raise DepthExhausted("radius beyond portrait depth", depth=g.depth, radius=radius)
    table = word_table(g.q, g.depth + g.root_distance)
    n = table.size(radius)
    return np.flatnonzero(g.images[:n] == np.arange(n))


def on_axis(g: TreePortrait) -> bool:
    """True when the base vertex lies on the axis of a hyperbolic g: d(x, g^2 x) = 2 d(x, g x) > 0."""
    d0 = g.root_distance
    if d0 == 0 or d0 > g.depth:
        return False
    table = word_table(g.q, g.depth + d0)
    twice = g.images[g.images[0]]
    return int(table.length[twice]) == 2 * d0


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def sample_stabilizer(q: int, rng: np.random.Generator, depth: int) -> TreePortrait:
    """Haar-uniform truncation of the stabilizer of the base vertex."""
    if depth < 1:
        raise DepthExhausted("stabilizer samples need depth >= 1", depth=depth)
    return _extend(q, depth, 0, rng.permutation(q + 1), rng)


def sample_rotation(q: int, rng: np.random.Generator, depth: int) -> TreePortrait:
    """A stabilizer sample whose root bijection is a derangement: the base vertex is its only fixed vertex."""
    while True:
        colors = rng.permutation(q + 1)
        if not (colors == np.arange(q + 1)).any():
            return _extend(q, depth, 0, colors, rng)


def sample_hyperbolic_portrait(
    q: int,
    rng: np.random.Generator,
    depth: int,
    length_law: float = 0.5,
    m: Optional[int] = None,
    max_translation: Optional[int] = None,
) -> TreePortrait:
    """
    k1 . shift(2m) . k2 with k1, k2 stabilizer samples, conditioned on translation length 2m.
    """
    if m is None:
        m = int(rng.geometric(length_law))
        if max_translation is not None:
            m = min(m, max_translation)
    if 2 * m > depth:
        raise DepthExhausted("translation longer than the portrait depth", depth=depth, m=m)
    middle = shift(q, m, depth)
    while True:
        inner = sample_stabilizer(q, rng, depth)
        outer = sample_stabilizer(q, rng, depth + 2 * m)
        g = compose(outer, compose(middle, inner))
        if on_axis(g):
            return g


def conjugate_by_word(g: TreePortrait, word: Sequence[int]) -> TreePortrait:
    """L_w g L_w^-1, defined to depth depth(g) - |w|; moves fixed points from x to w x."""
    d = len(word)
    depth = g.depth - d
    _check_depth(depth, "conjugate")
    outer = left_multiplication(g.q, word, g.depth + d + g.root_distance)
    inner = invert(left_multiplication(g.q, word, g.depth + d))
    return restrict(compose(outer, compose(g, inner)), depth)


def random_word(q: int, rng: np.random.Generator, length: int) -> Tuple[int, ...]:
    word: List[int] = []
    for _ in range(length):
        choices = [c for c in range(q + 1) if not word or c != word[-1]]
        word.append(int(rng.choice(choices)))
    return tuple(word)


def sample_elliptic_portrait(
    q: int, rng: np.random.Generator, depth: int, conjugator_length: int = 2
) -> TreePortrait:
    """A stabilizer sample conjugated by a random left multiplication."""
    word = random_word(q, rng, conjugator_length)
    return conjugate_by_word(sample_stabilizer(q, rng, depth + conjugator_length), word)


def elliptic_pair(
    q: int, rng: np.random.Generator, depth: int, distance: int
) -> Tuple[TreePortrait, TreePortrait]:
    """Two elliptic portraits fixing single vertices at the given distance."""
    first = sample_rotation(q, rng, depth)
    word = random_word(q, rng, distance)
    second = conjugate_by_word(sample_rotation(q, rng, depth + distance), word)
    return first, second


# ---------------------------------------------------------------------------
# Serialization: header line, then "<word> <image>" per line in BFS order
# ---------------------------------------------------------------------------

def encode(g: TreePortrait) -> str:
    table = word_table(g.q, g.depth + g.root_distance)
    lines = [f"depth:{g.depth};q:{g.q}"]
    for index, image in enumerate(g.images):
        lines.append(f"{format_word(table.word(index))} {format_word(table.word(int(image)))}")
    return "\n".join(lines)


def decode(text: str) -> TreePortrait:
    """
    Parse a serialized portrait.

    Raises:
        ParseError: On malformed or inconsistent input
    """
    lines = [line for line in text.strip().splitlines() if line.strip()]
    if not lines:
        raise ParseError("empty portrait")
    try:
        header = dict(part.split(":", 1) for part in lines[0].split(";"))
        depth, q = int(header["depth"]), int(header["q"])
    except (KeyError, ValueError) as e:
        raise ParseError("portrait header is depth:<R>;q:<q>") from e
    pairs = [line.split() for line in lines[1:]]
    if any(len(pair) != 2 for pair in pairs):
        raise ParseError("portrait lines are '<word> <image>'")
    longest = max(len(parse_word(image)) for _, image in pairs)
    table = word_table(q, max(depth, longest))
    if len(pairs) != table.size(depth):
        raise ParseError("portrait must list every word up to its depth", expected=table.size(depth))
    images = np.empty(len(pairs), dtype=np.int64)
    for index, (source, image) in enumerate(pairs):
        if table.index(parse_word(source)) != index:
            raise ParseError("portrait words must be in canonical order", line=index + 1)
        images[index] = table.index(parse_word(image))
    portrait = TreePortrait(q, depth, images)
    if not is_consistent(portrait):
        raise ParseError("portrait does not preserve adjacency")
    return portrait
