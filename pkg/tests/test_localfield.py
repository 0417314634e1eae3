import math

import pytest

from app.exceptions import DivisionByZero, NotAUnit, ParseError, PrecisionExhausted, WrongField
from app.services import localfield as lf


def test_integer_valuation(q5):
    assert lf.from_int(q5, 25).v == 2
    assert lf.from_int(q5, 7).v == 0
    assert lf.from_fraction(q5, 1, 5).v == -1


def test_exact_zero(q5):
    z = lf.from_int(q5, 0)
    assert z.is_exact_zero
    assert z.prec == math.inf
    assert lf.encode(z) == "v:inf;d:;prec:inf"


def test_add_takes_smaller_absolute_precision(q5):
    a = lf.from_digits(q5, [1, 2], 0, 5)
    b = lf.from_int(q5, 1)
    s = a + b
    assert s.prec == 5
    assert s.digits == (2, 2)


def test_total_cancellation_returns_zero_at_precision(q5):
    x = lf.from_digits(q5, [1], 0, 3)
    diff = x - x
    assert diff.is_zero
    assert diff.prec == 3
    assert not diff.is_exact_zero


def test_strict_add_raises_on_cancellation(q5):
    x = lf.from_digits(q5, [1], 0, 3)
    with pytest.raises(PrecisionExhausted):
        x.sub(x, strict=True)


def test_mul_relative_precision_is_minimum(q5):
    a = lf.from_digits(q5, [1, 1, 1], 0, 3)
    b = lf.from_int(q5, 10)
    product = a * b
    assert product.v == 1
    assert product.relprec == 3


def test_mul_and_inv_track_relative_precision(q5):
    a = lf.from_digits(q5, [1], 5, 37)
    b = lf.from_digits(q5, [1], 0, 29)
    product = a * b
    assert product.relprec == min(a.relprec, b.relprec) == 29
    assert product.prec == 34
    c = lf.from_digits(q5, [2], -5, 27)
    assert c.inv().relprec == c.relprec == 32
    assert c.inv().prec == 37


def test_precision_rules_on_random_operands(q5, rng):
    for _ in range(50):
        a, b = lf.sample_integral(q5, rng), lf.sample_integral(q5, rng)
        if a.is_zero or b.is_zero:
            continue
        a = a.truncate(int(rng.integers(a.v + 1, q5.precision + 1)))
        b = b * lf.pi_power(q5, int(rng.integers(-3, 4)))
        assert (a + b).prec <= min(a.prec, b.prec)
        assert (-a).prec == a.prec
        assert (a * b).relprec <= min(a.relprec, b.relprec)
        assert a.inv().relprec <= a.relprec


def test_inverse(q5):
    a = lf.from_digits(q5, [2, 3, 1], 1, 1 + q5.precision)
    assert (a * a.inv()).equals(lf.one(q5))
    assert a.inv().v == -1


def test_inverse_of_zero(q5):
    with pytest.raises(DivisionByZero):
        lf.from_int(q5, 0).inv()
    with pytest.raises(PrecisionExhausted):
        lf.zero(q5, 4).inv()


def test_mixing_fields_raises(q5, f3t):
    with pytest.raises(WrongField):
        lf.one(q5) + lf.one(f3t)


def test_frobenius_in_characteristic_three(f3t):
    one_plus_t = lf.from_digits(f3t, [1, 1])
    assert (one_plus_t ** 3).digits == (1, 0, 0, 1)


def test_integers_reduce_mod_p_in_laurent_field(f3t):
    assert lf.from_int(f3t, 3).is_exact_zero
    assert lf.from_int(f3t, 5).digits == (2,)


def test_constant_term_lift(f3t, q5):
    a = lf.from_digits(f3t, [2, 1])
    lift = lf.constant_term_lift(a)
    assert lift.digits == (2,)
    assert (a - lift).v == 1
    with pytest.raises(NotAUnit):
        lf.constant_term_lift(lf.pi_power(f3t, 1))
    with pytest.raises(WrongField):
        lf.constant_term_lift(lf.one(q5))


def test_substitute_power(f3t):
    t = lf.pi_power(f3t, 1)
    assert lf.substitute_power(t, 2).v == 2
    a = lf.from_digits(f3t, [1, 2])
    assert lf.substitute_power(a, 2).digits == (1, 0, 2)


def test_residue(q5):
    assert lf.residue(lf.from_int(q5, 7)) == 2
    assert lf.residue(lf.from_int(q5, 10)) == 0
    with pytest.raises(NotAUnit):
        lf.residue(lf.from_fraction(q5, 1, 5))


def test_digit_window_beyond_precision(q5):
    a = lf.from_digits(q5, [1, 2], 0, 4)
    assert a.digit_window(0, 4) == (1, 2, 0, 0)
    with pytest.raises(PrecisionExhausted):
        a.digit_window(0, 5)


def test_encoding(q5, f3t):
    a = lf.from_digits(q5, [3, 0, 4], -2, 5)
    assert lf.encode(a) == "v:-2;d:3,0,4;prec:5"
    assert lf.decode(q5, lf.encode(a)) == a
    b = lf.from_digits(f3t, [1, 2], 1, 6)
    assert lf.decode(f3t, lf.encode(b)) == b


@pytest.mark.parametrize(
    "text",
    [
        "v:0;d:5;prec:3",
        "v:0;d:0,1;prec:3",
        "v:0;d:1;prec:inf",
        "v:0;d:1",
        "v:x;d:1;prec:3",
    ],
)
def test_decode_rejects_malformed(q5, text):
    with pytest.raises(ParseError):
        lf.decode(q5, text)


def test_sample_integral_is_integral(q5, rng):
    for _ in range(20):
        a = lf.sample_integral(q5, rng)
        assert a.is_integral
        assert a.prec == q5.precision or a.is_zero
