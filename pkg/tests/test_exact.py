from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcalpha.exact import (
    BudgetError,
    DigitExpansion,
    DomainError,
    Enclosure,
    baseq_expand,
    budget,
    enclosure_arith,
    fmt_rat,
    parse_rat,
    rat,
    rat_arith,
    value_to_json,
)

fractions = st.fractions(max_denominator=10**6)
unit = st.fractions(min_value=0, max_value=1, max_denominator=5000)


@given(fractions)
def test_format_parse_roundtrip(x):
    assert parse_rat(fmt_rat(x)) == x


@pytest.mark.parametrize("value,text", [(Fraction(3), "3"), (Fraction(-1, 2), "-1/2"), (Fraction(6, 4), "3/2")])
def test_canonical_strings(value, text):
    assert fmt_rat(value) == text


@pytest.mark.parametrize("bad", ["1.5", "1/0", " 1", "1/-2", "+1", "1e3", "", "1/2/3", "one"])
def test_malformed_rationals_rejected(bad):
    with pytest.raises(DomainError):
        parse_rat(bad)


def test_rat_refuses_inexact():
    with pytest.raises(DomainError):
        rat(0.5)
    with pytest.raises(DomainError):
        rat(True)
    assert rat("-7/21") == Fraction(-1, 3)


@given(fractions, fractions)
def test_rat_arith_matches_fraction(a, b):
    assert rat_arith("add", a, b) == a + b
    assert rat_arith("sub", a, b) == a - b
    assert rat_arith("mul", a, b) == a * b
    assert rat_arith("cmp", a, b) == (a > b) - (a < b)
    assert rat_arith("min", a, b) == min(a, b)
    assert rat_arith("abs", a) == abs(a)
    if b:
        assert rat_arith("div", a, b) == a / b


def test_rat_arith_errors():
    with pytest.raises(DomainError):
        rat_arith("div", 1, 0)
    with pytest.raises(DomainError):
        rat_arith("pow", 1, 2)
    with pytest.raises(DomainError):
        rat_arith("add", 1)


# -- expansions --------------------------------------------------------------


@given(st.fractions(min_value=0, max_value=50, max_denominator=3000), st.integers(2, 11))
def test_expansion_value_roundtrip(x, base):
    exp = baseq_expand(x, base)
    assert exp.value() == x
    assert all(0 <= d < base for d in exp.preperiod + exp.period)
    # the terminating representative is preferred: never an all-(base-1) tail
    assert exp.period != (base - 1,)


def test_expansion_examples():
    assert baseq_expand(Fraction(1, 4), 3) == DigitExpansion(3, 0, (), (0, 2))
    assert baseq_expand(Fraction(1, 3), 3) == DigitExpansion(3, 0, (1,), ())
    assert baseq_expand(Fraction(1, 12), 3) == DigitExpansion(3, 0, (0,), (0, 2))
    assert baseq_expand(Fraction(7, 2), 10) == DigitExpansion(10, 3, (5,), ())
    assert baseq_expand(Fraction(1, 4), 3).digit(5) == 0
    assert baseq_expand(Fraction(1, 4), 3).digit(6) == 2


def test_expansion_errors():
    with pytest.raises(DomainError):
        baseq_expand(Fraction(-1, 2), 3)
    with pytest.raises(DomainError):
        baseq_expand(Fraction(1, 2), 1)
    with pytest.raises(DomainError):
        baseq_expand(Fraction(1, 2), 3).digit(0)
    # 1/(3^40 * 7) has a base-3 preperiod of length 40
    with pytest.raises(BudgetError):
        baseq_expand(Fraction(1, 3**40 * 7), 3, max_preperiod=10)


def test_budget_env(monkeypatch):
    monkeypatch.delenv("MCALPHA_BUDGET", raising=False)
    assert budget() == 10**6
    monkeypatch.setenv("MCALPHA_BUDGET", "17")
    assert budget() == 17
    monkeypatch.setenv("MCALPHA_BUDGET", "lots")
    with pytest.raises(DomainError):
        budget()


# -- enclosures --------------------------------------------------------------

pairs = st.tuples(fractions, fractions).map(sorted)


@given(pairs, pairs, st.data())
def test_enclosure_arithmetic_is_sound(p, r, data):
    a, b = Enclosure(*p), Enclosure(*r)
    x = data.draw(st.sampled_from([a.lo, a.hi, (a.lo + a.hi) / 2]))
    y = data.draw(st.sampled_from([b.lo, b.hi, (b.lo + b.hi) / 2]))
    assert x + y in a + b
    assert x - y in a - b
    assert abs(x) in abs(a)
    assert -x in -a
    assert 3 * x in a.scale(3)
    assert -2 * x in a.scale(-2)
    assert enclosure_arith("add", a, b) == a + b
    assert enclosure_arith("width", a) == a.hi - a.lo


def test_enclosure_basics():
    e = Enclosure(Fraction(1, 3), Fraction(1, 2))
    assert Fraction(2, 5) in e and Fraction(3, 5) not in e
    assert Enclosure.point(1).is_point
    assert e.intersect(Enclosure(0, Fraction(2, 5))) == Enclosure(Fraction(1, 3), Fraction(2, 5))
    assert Enclosure(Fraction(1, 3), Fraction(2, 5)).subset_of(e)
    assert abs(Enclosure(-2, 1)) == Enclosure(0, 2)
    with pytest.raises(DomainError):
        Enclosure(1, 0)
    with pytest.raises(DomainError):
        e.intersect(Enclosure(1, 2))


def test_value_json():
    assert value_to_json(Fraction(1, 3)) == {"value": "1/3"}
    assert value_to_json(Enclosure.point(Fraction(1, 3))) == {"value": "1/3"}
    assert value_to_json(Enclosure(0, Fraction(1, 2))) == {"lo": "0", "hi": "1/2"}
