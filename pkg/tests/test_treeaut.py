from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from app.exceptions import BudgetExceeded, DepthExhausted, ParseError, WrongField
from app.services import treeaut


def test_ball_size():
    assert treeaut.ball_size(2, 3) == 22
    assert treeaut.ball_size(3, 2) == 17
    assert treeaut.word_table(2, 3).size(3) == 22


def test_word_table_budget():
    with pytest.raises(BudgetExceeded):
        treeaut.word_table(3, 30)


def test_word_formatting():
    assert treeaut.format_word(()) == "."
    assert treeaut.parse_word(".") == ()
    assert treeaut.parse_word("012") == (0, 1, 2)
    with pytest.raises(ParseError):
        treeaut.parse_word("0a")
    with pytest.raises(ParseError):
        treeaut.word_table(2, 2).index((1, 1))


def test_word_distance():
    table = treeaut.word_table(2, 3)
    u = [table.index((0, 1)), table.index((0, 1)), 0]
    v = [table.index((0, 2)), table.index((1, 0)), table.index((2, 0, 1))]
    assert treeaut.word_distance(table, np.array(u), np.array(v)).tolist() == [2, 4, 3]


def test_stabilizer_sample_is_elliptic(rng):
    for _ in range(10):
        g = treeaut.sample_stabilizer(2, rng, 4)
        assert treeaut.is_consistent(g)
        assert g.root_distance == 0
        assert g.classify().is_elliptic


def test_compose_with_inverse_is_identity(rng):
    g = treeaut.sample_stabilizer(3, rng, 4)
    assert g.compose(g.inverse()).is_identity()
    assert g.inverse().compose(g).is_identity()
    assert treeaut.compose(treeaut.identity(3, 4), g) == g


def test_shift_translation_length():
    for m in (1, 2):
        g = treeaut.shift(2, m, 6)
        assert treeaut.is_consistent(g)
        assert treeaut.classify_portrait(g).translation_length == 2 * m
        assert treeaut.on_axis(g)


def test_hyperbolic_sampler(rng):
    for m in (1, 2):
        g = treeaut.sample_hyperbolic_portrait(2, rng, 8, m=m)
        assert treeaut.is_consistent(g)
        assert g.classify().translation_length == 2 * m
        assert g.preserves_parity


def test_hyperbolic_sampler_needs_depth(rng):
    with pytest.raises(DepthExhausted):
        treeaut.sample_hyperbolic_portrait(2, rng, 3, m=2)


def test_inverse_runs_out_of_depth():
    with pytest.raises(DepthExhausted):
        treeaut.invert(treeaut.shift(2, 2, 3))


@pytest.mark.parametrize("distance", [1, 2])
def test_elliptic_pair_product_length(rng, distance):
    for _ in range(5):
        first, second = treeaut.elliptic_pair(2, rng, 6, distance)
        assert first.classify().is_elliptic
        assert second.classify().is_elliptic
        assert first.compose(second).classify().translation_length == 2 * distance


def test_rotation_fixes_only_the_base_vertex(rng):
    g = treeaut.sample_rotation(2, rng, 4)
    assert g.fixed_vertices(3) == frozenset({"."})


def test_elliptic_conjugate_moves_fixed_point(rng):
    g = treeaut.conjugate_by_word(treeaut.sample_rotation(2, rng, 6), (1, 2))
    assert g.fixed_vertices(3) == frozenset({"12"})


def _topmost(table, indices):
    members = set(int(i) for i in indices)
    return [i for i in members if i == 0 or int(table.parent[i]) not in members]


def test_fixed_sets_are_subtrees(rng):
    elliptic = [treeaut.sample_stabilizer(2, rng, 6) for _ in range(5)]
    elliptic += [treeaut.sample_elliptic_portrait(2, rng, 6) for _ in range(5)]
    for g in elliptic:
        fixed = treeaut.fixed_set_in_ball(g, 4)
        assert len(_topmost(g.table, fixed)) <= 1
    for _ in range(3):
        g = treeaut.sample_hyperbolic_portrait(2, rng, 8, m=1)
        assert treeaut.fixed_set_in_ball(g, 4).size == 0


def test_displacements_are_even(rng):
    samples = [treeaut.sample_elliptic_portrait(2, rng, 6) for _ in range(5)]
    samples += [treeaut.sample_hyperbolic_portrait(2, rng, 8, max_translation=2) for _ in range(5)]
    for g in samples:
        table = g.table
        n = table.size(g.depth)
        moved = treeaut.word_distance(table, np.arange(n), g.images[:n])
        assert (moved % 2 == 0).all()


def test_stabilizer_is_uniform_on_spheres(rng):
    table = treeaut.word_table(2, 2)
    target = table.index((0, 1))
    counts = Counter(int(treeaut.sample_stabilizer(2, rng, 2).images[target]) for _ in range(900))
    assert sorted(counts) == table.level(2).tolist()
    _, p_value = chisquare(list(counts.values()))
    assert p_value > 0.01


def test_stabilizer_arrangements_are_uniform(rng):
    neighbors = treeaut.word_table(2, 1).level(1)
    counts = Counter(
        tuple(treeaut.sample_stabilizer(2, rng, 1).images[neighbors].tolist()) for _ in range(6000)
    )
    assert len(counts) == 6
    _, p_value = chisquare(list(counts.values()))
    assert p_value > 0.01


@pytest.mark.slow
def test_portrait_algebra_at_depth_twelve(rng):
    pool = [treeaut.sample_stabilizer(2, rng, 12) for _ in range(16)]
    pool += [treeaut.sample_rotation(2, rng, 12) for _ in range(4)]
    g = treeaut.identity(2, 12)
    for n in range(10_000):
        g = g.compose(pool[int(rng.integers(len(pool)))])
        if n % 2:
            g = g.inverse()
        assert g.depth == 12
        assert treeaut.is_consistent(g)
    assert g.compose(g.inverse()).is_identity()
    h = treeaut.sample_hyperbolic_portrait(2, rng, 12, m=2)
    assert treeaut.is_consistent(h.inverse())
    assert h.compose(h.inverse()).restrict(4).is_identity()


def test_encode_decode(rng):
    g = treeaut.sample_stabilizer(2, rng, 2)
    text = treeaut.encode(g)
    assert text.splitlines()[0] == "depth:2;q:2"
    assert treeaut.decode(text) == g


def test_decode_rejects_empty_input():
    with pytest.raises(ParseError):
        treeaut.decode("   ")


def test_portraits_have_no_commutator_trace(rng):
    g = treeaut.sample_stabilizer(2, rng, 2)
    with pytest.raises(WrongField):
        g.commutator_trace(g)
