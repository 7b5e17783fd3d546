"""Exact rational arithmetic, base-q digit expansions and rational enclosures.

Every scalar in the package is a :class:`fractions.Fraction`.  This module adds
the pieces the standard library does not have: strict parsing/formatting of
"p/q" strings, eventually periodic digit expansions, and closed intervals with
rational endpoints used to carry certified tails of infinite sums.
"""

from __future__ import annotations

import operator
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Fraction
RationalLike = Union[int, Fraction]

BUDGET_ENV = "MCALPHA_BUDGET"
DEFAULT_BUDGET = 10**6


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BudgetError(RuntimeError):
    """A computation would exceed the configured resource budget."""

    def __init__(self, message: str, count: int | None = None, undecided=None):
        super().__init__(message)
        self.count = count
        self.undecided = list(undecided or [])


class IndeterminateError(BudgetError):
    """An enclosure is too wide to decide a verdict; evaluate deeper."""


def budget() -> int:
    """Maximum number of intervals a single level enumeration may produce."""
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise DomainError(f"{BUDGET_ENV} must be positive, got {value}")
    return value


# ---------------------------------------------------------------------------
# Rationals

_RAT_RE = re.compile(r"^(-?)(\d+)(?:/(\d+))?$")


def rat(value) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a Fraction; floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise DomainError(f"cannot convert {type(value).__name__} exactly to a rational")


def parse_rat(text: str) -> Fraction:
    """Parse "n", "-n", "p/q" or "-p/q" (q > 0) exactly.

    Decimal points, exponents, whitespace and signs on the denominator are
    rejected so that malformed input fails before any computation starts.
    """
    match = _RAT_RE.match(text)
    if match is None:
        raise DomainError(f"malformed rational {text!r}; expected 'p/q' or an integer")
    sign, num, den = match.groups()
    denominator = int(den) if den is not None else 1
    if denominator == 0:
        raise DomainError(f"zero denominator in {text!r}")
    value = Fraction(int(num), denominator)
    return -value if sign else value


def fmt_rat(value: RationalLike) -> str:
    """Canonical string: "n" for integers, "p/q" otherwise."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _cmp(a: Fraction, b: Fraction) -> int:
    return (a > b) - (a < b)


def _div(a: Fraction, b: Fraction) -> Fraction:
    if b == 0:
        raise DomainError("division by zero")
    return a / b


_RAT_OPS = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": _div,
    "cmp": _cmp,
    "min": min,
    "max": max,
}


def rat_arith(op: str, a: RationalLike, b: RationalLike | None = None):
    """Apply one named exact operation; "abs" is unary, "cmp" returns -1/0/1."""
    a = rat(a)
    if op == "abs":
        return abs(a)
    try:
        fn = _RAT_OPS[op]
    except KeyError:
        raise DomainError(f"unknown rational operation {op!r}") from None
    if b is None:
        raise DomainError(f"operation {op!r} needs two operands")
    return fn(a, rat(b))


# ---------------------------------------------------------------------------
# Digit expansions


@dataclass(frozen=True)
class DigitExpansion:
    """Eventually periodic expansion ``integer_part . preperiod (period)*`` in ``base``.

    A terminating expansion has an empty period and no trailing zeros.
    """

    base: int
    integer_part: int
    preperiod: tuple[int, ...]
    period: tuple[int, ...] = ()

    @property
    def terminating(self) -> bool:
        return not self.period

    def digit(self, i: int) -> int:
        """The i-th fractional digit, 1-indexed."""
        if i < 1:
            raise DomainError("digit positions start at 1")
        n = len(self.preperiod)
        if i <= n:
            return self.preperiod[i - 1]
        if not self.period:
            return 0
        return self.period[(i - n - 1) % len(self.period)]

    def value(self) -> Fraction:
        """Reconstruct the exact rational (finite part plus geometric period sum)."""
        b = self.base
        total = Fraction(self.integer_part)
        n = len(self.preperiod)
        head = 0
        for d in self.preperiod:
            head = head * b + d
        total += Fraction(head, b**n)
        if self.period:
            length = len(self.period)
            block = 0
            for d in self.period:
                block = block * b + d
            total += Fraction(block, (b**length - 1) * b**n)
        return total


def baseq_expand(x: RationalLike, base: int, max_preperiod: int = 4096) -> DigitExpansion:
    """Exact base-``base`` expansion of a nonnegative rational by long division.

    The period is found when a remainder repeats.  Long division never produces
    an all-(base-1) tail, so the terminating representative is always returned.
    """
    x = rat(x)
    if base < 2:
        raise DomainError(f"base must be >= 2, got {base}")
    if max_preperiod < 1:
        raise DomainError("max_preperiod must be >= 1")
    if x < 0:
        raise DomainError(f"expansions are defined for x >= 0, got {fmt_rat(x)}")
    whole, rem = divmod(x.numerator, x.denominator)
    den = x.denominator
    digits: list[int] = []
    seen: dict[int, int] = {}
    while rem and rem not in seen:
        seen[rem] = len(digits)
        d, rem = divmod(rem * base, den)
        digits.append(d)
    if not rem:
        return DigitExpansion(base, whole, tuple(digits), ())
    start = seen[rem]
    if start > max_preperiod:
        raise BudgetError(
            f"preperiod of length {start} exceeds max_preperiod={max_preperiod}",
            count=start,
        )
    return DigitExpansion(base, whole, tuple(digits[:start]), tuple(digits[start:]))


# ---------------------------------------------------------------------------
# Enclosures


@dataclass(frozen=True)
class Enclosure:
    """Closed rational interval [lo, hi] certified to contain some exact value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", rat(self.lo))
        object.__setattr__(self, "hi", rat(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"empty enclosure [{fmt_rat(self.lo)}, {fmt_rat(self.hi)}]")

    @classmethod
    def point(cls, value: RationalLike) -> "Enclosure":
        return cls(value, value)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, value) -> bool:
        return self.lo <= rat(value) <= self.hi

    def subset_of(self, other: "Enclosure") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __add__(self, other):
        other = as_enclosure(other)
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_enclosure(other)
        return Enclosure(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return as_enclosure(other) - self

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def scale(self, c: RationalLike) -> "Enclosure":
        c = rat(c)
        a, b = self.lo * c, self.hi * c
        return Enclosure(min(a, b), max(a, b))

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Enclosure(0, max(-self.lo, self.hi))

    def intersect(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(max(self.lo, other.lo), min(self.hi, other.hi))

    def to_json(self) -> dict:
        return {"lo": fmt_rat(self.lo), "hi": fmt_rat(self.hi)}


def as_enclosure(value) -> Enclosure:
    if isinstance(value, Enclosure):
        return value
    return Enclosure.point(value)


def enclosure_arith(op: str, a: Enclosure, b: Enclosure | None = None):
    """Interval image of add/sub (binary), abs/width (unary)."""
    if op == "abs":
        return abs(a)
    if op == "width":
        return a.width
    if b is None:
        raise DomainError(f"enclosure operation {op!r} needs two operands")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    raise DomainError(f"unknown enclosure operation {op!r}")


def value_to_json(value) -> dict:
    """JSON payload for an evaluation result: exact value or enclosure."""
    if isinstance(value, Enclosure):
        if value.is_point:
            return {"value": fmt_rat(value.lo)}
        return value.to_json()
    return {"value": fmt_rat(value)}
