import numpy as np
import pytest

from app.exceptions import CommonFixedVertex, IndexOutOfRange, ParseError, ReductionFailed, WrongArity
from app.models.census_models import FiniteGroupKind
from app.services import nielsen, prg, psl2
from app.services.nielsen import MarkedTuple, MoveKind, NielsenMove


@pytest.fixture(scope="module")
def sl2_f7():
    return prg.FiniteMatrixGroup(FiniteGroupKind.SL2, 7)


def _random_word(rng, k, length):
    moves = nielsen.generators(k)
    return [moves[int(i)] for i in rng.integers(len(moves), size=length)]


def test_parse_and_format_word():
    word = nielsen.parse_word("R+ 1 2, T 3 2, L- 2 1")
    assert word == (
        NielsenMove(MoveKind.R_PLUS, 1, 2),
        NielsenMove(MoveKind.T, 2, 3),
        NielsenMove(MoveKind.L_MINUS, 2, 1),
    )
    assert nielsen.format_word(word) == "R+ 1 2, T 2 3, L- 2 1"
    assert nielsen.parse_word("") == ()


@pytest.mark.parametrize("text", ["R+ 1", "X 1 2", "R+ a 2"])
def test_parse_rejects_malformed_moves(text):
    with pytest.raises(ParseError):
        nielsen.parse_word(text)


def test_move_indices_checked(sl2_f7):
    with pytest.raises(IndexOutOfRange):
        NielsenMove(MoveKind.R_PLUS, 1, 1)
    t = MarkedTuple((sl2_f7.element((1, 1, 0, 1)), sl2_f7.element((1, 0, 1, 1))))
    with pytest.raises(IndexOutOfRange):
        nielsen.apply(NielsenMove(MoveKind.R_PLUS, 1, 3), t)


def test_apply_moves(sl2_f7):
    a = sl2_f7.element((1, 1, 0, 1))
    b = sl2_f7.element((1, 0, 1, 1))
    t = MarkedTuple((a, b))
    assert nielsen.apply(NielsenMove(MoveKind.R_PLUS, 1, 2), t).entries == (a, b.compose(a))
    assert nielsen.apply(NielsenMove(MoveKind.R_MINUS, 1, 2), t).entries == (a, b.compose(a.inverse()))
    assert nielsen.apply(NielsenMove(MoveKind.L_PLUS, 1, 2), t).entries == (a, a.compose(b))
    assert nielsen.apply(NielsenMove(MoveKind.L_MINUS, 1, 2), t).entries == (a, a.inverse().compose(b))
    assert nielsen.apply(nielsen.swap(1, 2), t).entries == (b, a)


def test_inverse_word_undoes_word(sl2_f7, rng):
    t = MarkedTuple(tuple(prg.FiniteElement(sl2_f7, int(i)) for i in rng.integers(sl2_f7.order, size=3)))
    word = _random_word(rng, 3, 12)
    moved = nielsen.apply_word(word, t)
    assert nielsen.apply_word(nielsen.inverse_word(word), moved).key() == t.key()


def test_generator_count():
    assert len(nielsen.generators(3)) == 4 * 6 + 3
    assert len(nielsen.fiber_moves(4)) == 8


def test_generated_subgroup_is_invariant(sl2_f7, rng):
    for n in range(100):
        k = 2 + n % 2
        t = MarkedTuple(tuple(prg.FiniteElement(sl2_f7, int(i)) for i in rng.integers(sl2_f7.order, size=k)))
        before = prg.subgroup(sl2_f7, [e.index for e in t.entries])
        trace = nielsen.orbit_invariant_commutator_trace(t) if k == 2 else None
        moved = t
        for move in _random_word(rng, k, 100):
            moved = nielsen.apply(move, moved)
            if k == 2:
                assert nielsen.orbit_invariant_commutator_trace(moved) == trace
        after = prg.subgroup(sl2_f7, [e.index for e in moved.entries])
        assert np.array_equal(before, after)


def test_commutator_trace_invariant_under_each_generator(sl2_f7, rng):
    for _ in range(1000):
        x, y = rng.integers(sl2_f7.order, size=2)
        t = MarkedTuple((prg.FiniteElement(sl2_f7, int(x)), prg.FiniteElement(sl2_f7, int(y))))
        trace = nielsen.orbit_invariant_commutator_trace(t)
        for move in nielsen.generators(2):
            assert nielsen.orbit_invariant_commutator_trace(nielsen.apply(move, t)) == trace


def test_commutator_trace_invariant_over_local_field(q5, rng):
    t = MarkedTuple((psl2.sample_compact(q5, rng), psl2.sample_hyperbolic(q5, rng, m=1)))
    trace = nielsen.orbit_invariant_commutator_trace(t)
    moved = nielsen.apply_word(_random_word(rng, 2, 6), t)
    assert nielsen.orbit_invariant_commutator_trace(moved).equals(trace)


def test_commutator_trace_needs_pair(sl2_f7):
    e = sl2_f7.element((1, 0, 0, 1))
    with pytest.raises(WrongArity):
        nielsen.orbit_invariant_commutator_trace(MarkedTuple((e, e, e)))


def test_empty_tuple_rejected():
    with pytest.raises(WrongArity):
        MarkedTuple(())


def test_reduce_swaps_elliptic_entry_forward(q5, rng):
    t = MarkedTuple((psl2.sample_hyperbolic(q5, rng, m=1), psl2.sample_elliptic(q5, rng)))
    word = nielsen.reduce_to_elliptic(t)
    assert nielsen.format_word(word) == "T 1 2"


def test_reduce_is_deterministic(q5, rng):
    e, h, other = psl2.sample_elliptic(q5, rng), psl2.sample_hyperbolic(q5, rng, m=1), psl2.sample_elliptic(q5, rng)
    t = MarkedTuple((e.compose(h), h, other))
    word = nielsen.reduce_to_elliptic(t)
    assert nielsen.reduce_to_elliptic(t) == word
    assert nielsen.apply_word(word, t)[1].classify().is_elliptic


def test_reduce_respects_budget(q5):
    t = MarkedTuple((psl2.diagonal(q5, 1), psl2.diagonal(q5, 2)))
    with pytest.raises(ReductionFailed):
        nielsen.reduce_to_elliptic(t, budget=0)


def test_normalize_with_hyperbolic_product(q5, rng):
    first, second = psl2.elliptic_pair(q5, rng, 1)
    t = MarkedTuple((first, first, second))
    word = nielsen.normalize_to_O(t)
    assert nielsen.format_word(word) == "R+ 1 3, T 2 3"
    assert nielsen.membership_O(nielsen.apply_word(word, t), 1, 2)


def test_normalize_already_in_O(q5, rng):
    t = MarkedTuple((psl2.sample_elliptic(q5, rng), psl2.sample_hyperbolic(q5, rng, m=1)))
    assert nielsen.normalize_to_O(t) == ()


def test_normalize_detects_common_fixed_vertex(q5, rng):
    t = MarkedTuple((psl2.sample_compact(q5, rng), psl2.sample_compact(q5, rng), psl2.rotation(q5)))
    with pytest.raises(CommonFixedVertex):
        nielsen.normalize_to_O(t, scan_radius=2)


def test_normalize_needs_elliptic_first_entry(q5):
    with pytest.raises(ReductionFailed):
        nielsen.normalize_to_O(MarkedTuple((psl2.diagonal(q5, 1), psl2.identity(q5))))


def test_normalize_needs_two_entries(q5):
    with pytest.raises(WrongArity):
        nielsen.normalize_to_O(MarkedTuple((psl2.identity(q5),)))


def test_serre_index(q5, rng):
    first, second = psl2.elliptic_pair(q5, rng, 2)
    assert nielsen.serre_index(MarkedTuple((first, first, second))) == 3
    assert nielsen.serre_index(MarkedTuple((first, first))) is None
