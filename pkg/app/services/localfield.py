"""
Truncated arithmetic in Q_p and F_p((t)).

A nonzero element is stored as pi^v * u, where u is a unit known modulo
pi^r (r is the relative precision, at most the field precision N).  The
absolute precision ``prec = v + r`` says the element is known modulo
pi^prec.  Zero carries only ``prec``; exact zero has ``prec = inf``.

Units of Q_p are Python integers in [0, p^r).  Units of F_p((t)) are tuples
of r coefficients in [0, p).  The ``raw_*`` helpers work on these values at
a given truncation and are shared with the lattice code in ``bttree``.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from sympy import multiplicity

from app import constants
from app.exceptions import DivisionByZero, NotAUnit, ParseError, PrecisionExhausted, WrongField
from app.models.field_models import FieldSpec

INF = math.inf

Raw = Union[int, Tuple[int, ...]]
Number = Union[int, float]


# ---------------------------------------------------------------------------
# Raw values: integers mod p^r (Q_p) or coefficient tuples of length r (F_p((t)))
# ---------------------------------------------------------------------------

def raw_zero(spec: FieldSpec, r: int) -> Raw:
    return 0 if spec.is_padic else (0,) * r


def raw_from_digits(spec: FieldSpec, digits: Sequence[int], r: int) -> Raw:
    p = spec.p
    digits = [int(d) % p for d in list(digits)[: max(r, 0)]]
    if spec.is_padic:
        value = 0
        for digit in reversed(digits):
            value = value * p + digit
        return value
    return tuple(digits) + (0,) * (r - len(digits))


def raw_digits(spec: FieldSpec, raw: Raw, r: int) -> Tuple[int, ...]:
    """Little-endian digits of a raw value, exactly r of them."""
    if spec.is_padic:
        out = []
        value = raw
        for _ in range(r):
            value, digit = divmod(value, spec.p)
            out.append(digit)
        return tuple(out)
    return tuple(raw[:r]) + (0,) * (r - len(raw))


def raw_truncate(spec: FieldSpec, raw: Raw, r: int) -> Raw:
    if spec.is_padic:
        return raw % spec.p ** r
    return tuple(raw[:r]) + (0,) * (r - len(raw))


def raw_shift(spec: FieldSpec, raw: Raw, e: int, r: int) -> Raw:
    """pi^e * raw modulo pi^r, for e >= 0."""
    if e >= r:
        return raw_zero(spec, r)
    if spec.is_padic:
        return (raw * spec.p ** e) % spec.p ** r
    return ((0,) * e + tuple(raw))[:r] + (0,) * max(0, r - e - len(raw))


def raw_unshift(spec: FieldSpec, raw: Raw, e: int, r: int) -> Raw:
    """raw / pi^e, known modulo pi^(r - e); raw must be divisible by pi^e."""
    if spec.is_padic:
        return (raw // spec.p ** e) % spec.p ** (r - e)
    return tuple(raw[e:r])


def raw_add(spec: FieldSpec, x: Raw, y: Raw, r: int) -> Raw:
    if spec.is_padic:
        return (x + y) % spec.p ** r
    p = spec.p
    return tuple((a + b) % p for a, b in zip(x, y))


def raw_sub(spec: FieldSpec, x: Raw, y: Raw, r: int) -> Raw:
    if spec.is_padic:
        return (x - y) % spec.p ** r
    p = spec.p
    return tuple((a - b) % p for a, b in zip(x, y))


def raw_neg(spec: FieldSpec, x: Raw, r: int) -> Raw:
    if spec.is_padic:
        return (-x) % spec.p ** r
    p = spec.p
    return tuple((-a) % p for a in x)


def raw_mul(spec: FieldSpec, x: Raw, y: Raw, r: int) -> Raw:
    if spec.is_padic:
        return (x * y) % spec.p ** r
    product = np.convolve(np.asarray(x[:r], dtype=np.int64), np.asarray(y[:r], dtype=np.int64))
    return tuple(int(c) for c in product[:r] % spec.p)


def raw_valuation(spec: FieldSpec, raw: Raw, r: int) -> int:
    """Valuation of a raw value known modulo pi^r, capped at r."""
    if spec.is_padic:
        raw %= spec.p ** r
        if raw == 0:
            return r
        return min(int(multiplicity(spec.p, raw)), r)
    for index, coefficient in enumerate(raw[:r]):
        if coefficient:
            return index
    return r


def raw_inverse(spec: FieldSpec, unit: Raw, r: int) -> Raw:
    """Inverse of a unit modulo pi^r."""
    p = spec.p
    if spec.is_padic:
        return pow(unit, -1, p ** r)
    lead_inverse = pow(unit[0], -1, p)
    out = [lead_inverse] + [0] * (r - 1)
    for n in range(1, r):
        acc = 0
        for i in range(1, n + 1):
            acc += unit[i] * out[n - i]
        out[n] = (-lead_inverse * acc) % p
    return tuple(out)


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalFieldElement:
    """Element of Q_p or F_p((t)) at tracked precision."""

    spec: FieldSpec
    v: Number
    unit: Raw
    prec: Number

    # -- properties ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.v == INF

    @property
    def is_exact_zero(self) -> bool:
        return self.is_zero and self.prec == INF

    @property
    def relprec(self) -> Number:
        """Relative precision: number of known digits of the unit part."""
        if self.is_zero:
            return 0
        return self.prec - self.v

    @property
    def digits(self) -> Tuple[int, ...]:
        """Known digits of the unit part, little-endian, trailing zeros stripped."""
        if self.is_zero:
            return ()
        out = list(raw_digits(self.spec, self.unit, int(self.relprec)))
        while out and out[-1] == 0:
            out.pop()
        return tuple(out)

    @property
    def leading_digit(self) -> int:
        if self.is_zero:
            return 0
        if self.spec.is_padic:
            return self.unit % self.spec.p
        return self.unit[0]

    @property
    def is_integral(self) -> bool:
        """True when the element provably lies in the ring of integers."""
        if self.is_zero:
            return self.prec >= 0
        return self.v >= 0

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "LocalFieldElement":
        if isinstance(other, LocalFieldElement):
            if other.spec is not self.spec and other.spec != self.spec:
                raise WrongField("operands belong to different fields", left=self.spec.label(), right=other.spec.label())
            return other
        if isinstance(other, int):
            return from_int(self.spec, other)
        raise TypeError(f"cannot combine a field element with {type(other).__name__}")

    def truncate(self, prec: Number) -> "LocalFieldElement":
        """Forget everything at and above pi^prec."""
        if prec >= self.prec:
            return self
        if self.is_zero or prec <= self.v:
            return zero(self.spec, prec)
        r = int(prec - self.v)
        return LocalFieldElement(self.spec, self.v, raw_truncate(self.spec, self.unit, r), prec)

    def add(self, other, strict: bool = False) -> "LocalFieldElement":
        """
        Sum at the smaller of the two absolute precisions.

        Args:
            other: Element or integer
            strict: Raise when the sum cancels to zero at the available precision

        Returns:
            Canonical sum

        Raises:
            PrecisionExhausted: In strict mode, when every known digit cancels
        """
        other = self._coerce(other)
        spec = self.spec
        prec = min(self.prec, other.prec)
        if self.is_zero and other.is_zero:
            result = zero(spec, prec)
        elif self.is_zero:
            result = other.truncate(prec)
        elif other.is_zero:
            result = self.truncate(prec)
        else:
            base = min(self.v, other.v)
            r = int(prec - base)
            if r <= 0:
                result = zero(spec, prec)
            else:
                x = raw_shift(spec, self.unit, int(self.v - base), r)
                y = raw_shift(spec, other.unit, int(other.v - base), r)
                result = _from_raw(spec, raw_add(spec, x, y, r), base, r)
        if strict and result.is_zero and result.prec != INF:
            raise PrecisionExhausted(operation="add", known_prec=result.prec)
        return result

    def neg(self) -> "LocalFieldElement":
        if self.is_zero:
            return self
        r = int(self.relprec)
        return LocalFieldElement(self.spec, self.v, raw_neg(self.spec, self.unit, r), self.prec)

    def sub(self, other, strict: bool = False) -> "LocalFieldElement":
        other = self._coerce(other)
        return self.add(other.neg(), strict=strict)

    def mul(self, other) -> "LocalFieldElement":
        """Product; valuations add and relative precision is the smaller one."""
        other = self._coerce(other)
        spec = self.spec
        if self.is_zero or other.is_zero:
            if self.is_zero and other.is_zero:
                return zero(spec, self.prec + other.prec)
            if self.is_zero:
                return zero(spec, self.prec + other.v)
            return zero(spec, other.prec + self.v)
        r = int(min(self.relprec, other.relprec))
        unit = raw_mul(spec, raw_truncate(spec, self.unit, r), raw_truncate(spec, other.unit, r), r)
        v = self.v + other.v
        return LocalFieldElement(spec, v, unit, v + r)

    def inv(self) -> "LocalFieldElement":
        """
        Multiplicative inverse.

        Raises:
            DivisionByZero: For exact zero
            PrecisionExhausted: For zero known only to finite precision
        """
        if self.is_exact_zero:
            raise DivisionByZero()
        if self.is_zero:
            raise PrecisionExhausted(operation="inv", known_prec=self.prec)
        r = int(self.relprec)
        return LocalFieldElement(self.spec, -self.v, raw_inverse(self.spec, self.unit, r), -self.v + r)

    def div(self, other) -> "LocalFieldElement":
        other = self._coerce(other)
        return self.mul(other.inv())

    def power(self, n: int) -> "LocalFieldElement":
        if n < 0:
            return self.inv().power(-n)
        result = one(self.spec)
        base = self
        while n:
            if n & 1:
                result = result.mul(base)
            base = base.mul(base)
            n >>= 1
        return result

    __add__ = add
    __mul__ = mul
    __neg__ = neg
    __truediv__ = div
    __pow__ = power

    def __radd__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.sub(other)

    def __rsub__(self, other):
        return self._coerce(other).sub(self)

    def __rmul__(self, other):
        return self.mul(other)

    def __rtruediv__(self, other):
        return self._coerce(other).div(self)

    # -- comparison ---------------------------------------------------------

    def equals(self, other) -> bool:
        """Equality up to the precision both sides are known to."""
        return self.sub(other).is_zero

    def valuation(self) -> Number:
        return self.v

    # -- digits -------------------------------------------------------------

    def digit_window(self, lo: int, hi: int) -> Tuple[int, ...]:
        """
        Digits at pi^lo, ..., pi^(hi-1) of the canonical expansion.

        Raises:
            PrecisionExhausted: If any requested digit is beyond the known precision
        """
        if hi > self.prec:
            raise PrecisionExhausted(operation="digit_window", requested=hi, known_prec=self.prec)
        if hi <= lo:
            return ()
        if self.is_zero:
            return (0,) * (hi - lo)
        start = int(self.v)
        known = raw_digits(self.spec, self.unit, int(self.relprec))
        return tuple(known[i - start] if start <= i < start + len(known) else 0 for i in range(lo, hi))

    def residue(self) -> int:
        """Image in F_p of an integral element."""
        if self.is_zero:
            if self.prec <= 0:
                raise PrecisionExhausted(operation="residue", known_prec=self.prec)
            return 0
        if self.v < 0:
            raise NotAUnit("element is not integral", valuation=self.v)
        return self.leading_digit if self.v == 0 else 0

    def encode(self) -> str:
        return encode(self)

    def __str__(self) -> str:
        return encode(self)


def _from_raw(spec: FieldSpec, raw: Raw, base: int, r: int) -> LocalFieldElement:
    """Canonical element pi^base * raw, with raw known modulo pi^r."""
    if r <= 0:
        return zero(spec, base + r)
    e = raw_valuation(spec, raw, r)
    if e >= r:
        return zero(spec, base + r)
    unit = raw_unshift(spec, raw, e, r)
    rel = r - e
    if rel > spec.precision:
        rel = spec.precision
        unit = raw_truncate(spec, unit, rel)
    v = base + e
    return LocalFieldElement(spec, v, unit, v + rel)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def zero(spec: FieldSpec, prec: Number = INF) -> LocalFieldElement:
    return LocalFieldElement(spec, INF, raw_zero(spec, 0), prec)


def one(spec: FieldSpec) -> LocalFieldElement:
    return from_int(spec, 1)


def from_int(spec: FieldSpec, n: int) -> LocalFieldElement:
    """An integer, to full relative precision; 0 (or a multiple of p in F_p((t))) is exact zero."""
    p, N = spec.p, spec.precision
    if spec.is_padic:
        if n == 0:
            return zero(spec)
        e = int(multiplicity(p, abs(n)))
        return LocalFieldElement(spec, e, (n // p ** e) % p ** N, e + N)
    if n % p == 0:
        return zero(spec)
    return LocalFieldElement(spec, 0, (n % p,) + (0,) * (N - 1), N)


def from_fraction(spec: FieldSpec, numerator: int, denominator: int) -> LocalFieldElement:
    return from_int(spec, numerator).div(from_int(spec, denominator))


def pi_power(spec: FieldSpec, m: int) -> LocalFieldElement:
    """The uniformizer p (or t) raised to m."""
    N = spec.precision
    unit = 1 if spec.is_padic else (1,) + (0,) * (N - 1)
    return LocalFieldElement(spec, m, unit, m + N)


def from_digits(
    spec: FieldSpec,
    digits: Sequence[int],
    v: int = 0,
    prec: Optional[Number] = None,
) -> LocalFieldElement:
    """
    Element sum(digits[i] * pi^(v+i)) known modulo pi^prec.

    Args:
        spec: Field
        digits: Little-endian digits, each reduced mod p
        v: Exponent of the first digit
        prec: Absolute precision, defaults to v + N

    Returns:
        Canonical element
    """
    if prec is None:
        prec = v + spec.precision
    if prec == INF:
        raise ParseError("explicit digits need a finite precision")
    r = int(prec - v)
    if r <= 0:
        return zero(spec, prec)
    return _from_raw(spec, raw_from_digits(spec, digits, r), v, r)


def sample_integral(spec: FieldSpec, rng: np.random.Generator) -> LocalFieldElement:
    """Uniform element of O / pi^N."""
    digits = rng.integers(0, spec.p, size=spec.precision)
    return from_digits(spec, digits.tolist(), 0, spec.precision)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def add(a: LocalFieldElement, b: LocalFieldElement, strict: bool = False) -> LocalFieldElement:
    return a.add(b, strict=strict)


def sub(a: LocalFieldElement, b: LocalFieldElement) -> LocalFieldElement:
    return a.sub(b)


def mul(a: LocalFieldElement, b: LocalFieldElement) -> LocalFieldElement:
    return a.mul(b)


def neg(a: LocalFieldElement) -> LocalFieldElement:
    return a.neg()


def inv(a: LocalFieldElement) -> LocalFieldElement:
    return a.inv()


def div(a: LocalFieldElement, b: LocalFieldElement) -> LocalFieldElement:
    return a.div(b)


def valuation(a: LocalFieldElement) -> Number:
    """Valuation, or inf for zero (whose precision stays on the element)."""
    return a.v


def constant_term_lift(a: LocalFieldElement) -> LocalFieldElement:
    """
    The constant coefficient of a unit of F_p((t)), as an element of F_p inside K.

    Raises:
        WrongField: For Q_p elements
        NotAUnit: If the valuation is not 0
    """
    if a.spec.is_padic:
        raise WrongField("constant_term_lift needs a Laurent series field", field=a.spec.label())
    if a.is_zero or a.v != 0:
        raise NotAUnit(valuation=a.v)
    return from_int(a.spec, a.leading_digit)


def substitute_power(a: LocalFieldElement, m: int) -> LocalFieldElement:
    """
    Image of a under t -> t^m, embedding F_p((s)) as F_p((t^m)).

    Raises:
        WrongField: For Q_p elements
    """
    spec = a.spec
    if spec.is_padic:
        raise WrongField("substitute_power needs a Laurent series field", field=spec.label())
    if m < 1:
        raise ParseError("substitution exponent must be positive", exponent=m)
    if a.is_zero:
        return zero(spec, a.prec * m)
    r = int(a.relprec)
    rel = min(m * r, spec.precision)
    unit = [0] * rel
    for i, coefficient in enumerate(a.unit):
        if m * i >= rel:
            break
        unit[m * i] = coefficient
    v = a.v * m
    return LocalFieldElement(spec, v, tuple(unit), v + rel)


def residue(a: LocalFieldElement) -> int:
    return a.residue()


# ---------------------------------------------------------------------------
# Text encoding  v:<int>;d:<d0,d1,...>;prec:<int>
# ---------------------------------------------------------------------------

def _number_token(x: Number) -> str:
    return constants.INFINITY_TOKEN if x == INF else str(int(x))


def _parse_number(token: str) -> Number:
    token = token.strip()
    if token == constants.INFINITY_TOKEN:
        return INF
    try:
        return int(token)
    except ValueError as e:
        raise ParseError(f"not an integer: {token!r}") from e


def encode(a: LocalFieldElement) -> str:
    digits = ",".join(str(d) for d in a.digits)
    return f"v:{_number_token(a.v)};d:{digits};prec:{_number_token(a.prec)}"


def decode(spec: FieldSpec, text: str) -> LocalFieldElement:
    """
    Parse the canonical element encoding.

    Raises:
        ParseError: On malformed or non-canonical text
    """
    parts = {}
    for chunk in text.strip().split(";"):
        key, sep, value = chunk.partition(":")
        if not sep:
            raise ParseError(f"malformed element field: {chunk!r}", text=text)
        parts[key.strip()] = value
    if set(parts) != {"v", "d", "prec"}:
        raise ParseError("element needs exactly the fields v, d, prec", text=text)
    v = _parse_number(parts["v"])
    prec = _parse_number(parts["prec"])
    digit_text = parts["d"].strip()
    try:
        digits = [int(x) for x in digit_text.split(",")] if digit_text else []
    except ValueError as e:
        raise ParseError("digits must be integers", text=text) from e
    if any(not 0 <= d < spec.p for d in digits):
        raise ParseError(f"digits must lie in [0, {spec.p})", text=text)
    if v == INF:
        if digits:
            raise ParseError("zero carries no digits", text=text)
        return zero(spec, prec)
    if not digits or digits[0] == 0 or digits[-1] == 0:
        raise ParseError("digits must be non-empty with nonzero first and last digit", text=text)
    if prec == INF or v + len(digits) > prec:
        raise ParseError("precision must cover the digits", text=text)
    if prec - v > spec.precision:
        raise ParseError("relative precision exceeds the field precision", text=text)
    return from_digits(spec, digits, int(v), prec)
