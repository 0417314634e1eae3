import io

import numpy as np
import pytest

from app.exceptions import BudgetExceeded, ConfigValidationError, NotInSL2
from app.models.census_models import FiniteGroupKind
from app.services import nielsen, prg
from app.services.nielsen import MarkedTuple


@pytest.fixture(scope="module")
def sl2_f5():
    return prg.FiniteMatrixGroup(FiniteGroupKind.SL2, 5)


@pytest.fixture(scope="module")
def psl2_f5():
    return prg.FiniteMatrixGroup(FiniteGroupKind.PSL2, 5)


@pytest.mark.parametrize(
    "kind, p, order",
    [(FiniteGroupKind.SL2, 5, 120), (FiniteGroupKind.PSL2, 5, 60), (FiniteGroupKind.SL2, 7, 336)],
)
def test_group_orders(kind, p, order):
    group = prg.FiniteMatrixGroup(kind, p)
    assert group.order == order
    assert group.mul[group.identity, 7] == 7


@pytest.mark.parametrize("p", [2, 9, 101])
def test_rejects_unsupported_primes(p):
    with pytest.raises(ConfigValidationError):
        prg.FiniteMatrixGroup(FiniteGroupKind.SL2, p)


def test_psl2_identifies_signs(psl2_f5):
    assert psl2_f5.index_of((4, 0, 0, 4)) == psl2_f5.identity
    with pytest.raises(NotInSL2):
        psl2_f5.index_of((1, 1, 1, 1))


def test_inverse_table(sl2_f5):
    n = sl2_f5.order
    assert (sl2_f5.mul[np.arange(n), sl2_f5.inv] == sl2_f5.identity).all()


def test_is_generating(sl2_f5):
    upper = sl2_f5.element((1, 1, 0, 1))
    lower = sl2_f5.element((1, 0, 1, 1))
    assert prg.is_generating(MarkedTuple((upper, lower)))
    one = sl2_f5.element((1, 0, 0, 1))
    assert not prg.is_generating(MarkedTuple((one, one, one)))
    assert prg.subgroup(sl2_f5, [upper.index]).sum() == 5


def test_decode_tuple(sl2_f5):
    t = prg.decode_tuple(sl2_f5, "1 1 0 1 | 1 0 1 1")
    assert t.k == 2
    assert t[1].encode() == "1 1 0 1"


def test_psl2_f5_pairs(psl2_f5):
    report = prg.orbit_census(psl2_f5, 2)
    assert report.total_tuples == 3600
    assert sum(report.orbit_sizes) == report.generating_tuples
    assert report.generating_tuples + report.non_generating_tuples == 3600


def test_sl2_f5_pairs_split_by_commutator_trace(sl2_f5):
    report = prg.orbit_census(sl2_f5, 2)
    assert report.orbit_count >= 2
    assert len(report.trace_classes) >= 2
    assert sum(report.trace_classes.values()) == report.orbit_count


def test_psl2_f5_triples_form_one_orbit(psl2_f5):
    report = prg.orbit_census(psl2_f5, 3)
    assert report.orbit_count == 1
    assert report.generating_tuples == report.orbit_sizes[0]
    assert report.trace_classes is None


def test_components_are_closed_under_moves(sl2_f5):
    total = sl2_f5.order**2
    roots = prg._components(sl2_f5, 2, total)
    idx = np.arange(total, dtype=np.int64)
    for image in prg._move_images(sl2_f5, 2, idx):
        assert (roots[image] == roots).all()
    first, second = prg._digits(idx, sl2_f5.order, 2)
    traces = sl2_f5.commutator_traces(first, second)
    for root in np.unique(roots)[:50]:
        assert len(np.unique(traces[roots == root])) == 1


def test_census_is_deterministic(psl2_f5):
    assert prg.orbit_census(psl2_f5, 2) == prg.orbit_census(psl2_f5, 2)


def test_census_budget():
    group = prg.FiniteMatrixGroup(FiniteGroupKind.SL2, 13)
    with pytest.raises(BudgetExceeded) as exc_info:
        prg.orbit_census(group, 3)
    assert exc_info.value.details["required"] == 2184**3
    assert "budget is" in exc_info.value.message


def test_write_csv(psl2_f5):
    report = prg.orbit_census(psl2_f5, 2)
    stream = io.StringIO()
    prg.write_csv(report, stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == "orbit_id,size,generating,trace_class,representative"
    assert len(lines) == len(report.rows) + 1


def test_fiber_orbit_is_a_coset(sl2_f5):
    upper = sl2_f5.element((1, 1, 0, 1))
    lower = sl2_f5.element((1, 0, 1, 1))
    third = sl2_f5.element((2, 0, 0, 3))
    assert len(prg.fiber_orbit(MarkedTuple((upper, upper, third)))) == 5
    assert len(prg.fiber_orbit(MarkedTuple((upper, lower, third)))) == 120


def test_fiber_moves_keep_the_pair(sl2_f5, rng):
    t = MarkedTuple(tuple(prg.FiniteElement(sl2_f5, int(i)) for i in rng.integers(120, size=4)))
    moves = nielsen.fiber_moves(4)
    for i in rng.integers(len(moves), size=10):
        t2 = nielsen.apply(moves[int(i)], t)
        assert t2.entries[:2] == t.entries[:2]


@pytest.mark.slow
def test_sl2_f5_triples_form_one_orbit(sl2_f5):
    report = prg.orbit_census(sl2_f5, 3)
    assert report.orbit_count == 1


@pytest.mark.slow
def test_sl2_f7_triples_form_one_orbit():
    group = prg.FiniteMatrixGroup(FiniteGroupKind.SL2, 7)
    report = prg.orbit_census(group, 3, allow_large=True)
    assert report.orbit_count == 1
