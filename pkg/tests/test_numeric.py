from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from prguess.numeric import (
    Mode, format_rational, format_scalar, parse_rational, parse_scalar, rat, rat_arith, to_mode,
)
from prguess.validation import check_bits, check_noise, check_rounds

fractions = st.fractions(max_denominator=10**6)


def test_rat_canonical():
    assert rat(2, 4) == Fraction(1, 2)
    assert rat(2, -4).denominator == 2
    assert rat_arith(rat(1, 3), rat(1, 6), "+") == Fraction(1, 2)
    assert rat_arith(rat(1, 3), rat(1, 6), "/") == 2


def test_rat_errors():
    with pytest.raises(ZeroDivisionError):
        rat(1, 0)
    with pytest.raises(TypeError):
        rat(0.5, 1)
    with pytest.raises(ValueError):
        rat_arith(rat(1), rat(2), "%")


@given(fractions)
def test_text_round_trip(q):
    text = format_rational(q)
    assert parse_rational(text) == q
    assert " " not in text


@pytest.mark.parametrize("bad", ["1 /2", "0.5", "1/-2", "+1/2", "", "1/2/3", "abc"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


def test_parse_scalar_modes():
    assert parse_scalar("-3/4", Mode.EXACT) == Fraction(-3, 4)
    assert parse_scalar("7", "exact") == 7
    assert parse_scalar("0.25", Mode.FLOAT) == 0.25
    assert parse_scalar("1/4", Mode.FLOAT) == 0.25
    with pytest.raises(ValueError):
        parse_scalar("nan", Mode.FLOAT)
    with pytest.raises(ValueError):
        parse_scalar("0.5", Mode.EXACT)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_text_round_trip(x):
    assert parse_scalar(format_scalar(x), Mode.FLOAT) == x


@given(fractions, fractions)
def test_field_laws(p, q):
    assert rat_arith(p, q, "+") == rat_arith(q, p, "+")
    assert rat_arith(rat_arith(p, q, "-"), q, "+") == p
    if q:
        assert rat_arith(rat_arith(p, q, "/"), q, "*") == p


def test_to_mode():
    assert to_mode(1, Mode.EXACT) == Fraction(1)
    assert isinstance(to_mode(Fraction(1, 3), Mode.FLOAT), float)
    with pytest.raises(TypeError):
        to_mode(0.5, Mode.EXACT)


def test_validation_helpers():
    assert check_rounds(3) == 3
    for bad in (0, 6):
        with pytest.raises(ValueError):
            check_rounds(bad)
    with pytest.raises(TypeError):
        check_rounds(2.0)
    assert check_noise("1/2", Mode.EXACT) == Fraction(1, 2)
    assert check_noise(0.5) == 0.5
    with pytest.raises(ValueError):
        check_noise(Fraction(3, 2))
    with pytest.raises(ValueError):
        check_noise(-1, low=0)
    assert check_bits("10", 2) == 2
    assert check_bits(3, 2) == 3
    with pytest.raises(ValueError):
        check_bits("1", 2)
    with pytest.raises(ValueError):
        check_bits(4, 2)
