"""Scalars shared by the exact and floating-point code paths.

Exact values are :class:`fractions.Fraction` instances, which are always kept
in lowest terms with a positive denominator.  Approximate values are plain
binary64 floats.  A problem is assembled in one mode and never mixes them.
"""

from __future__ import annotations

import enum
import math
import operator
import re
from fractions import Fraction
from typing import Union

Rational = Fraction
Scalar = Union[Fraction, float]

_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")
_OPS = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}


class Mode(str, enum.Enum):
    EXACT = "exact"
    FLOAT = "float"

    @classmethod
    def coerce(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown mode {value!r}; expected 'exact' or 'float'") from None


def rat(p: int, q: int = 1) -> Fraction:
    """Canonical fraction p/q.  Raises ZeroDivisionError when q == 0."""
    if not isinstance(p, int) or not isinstance(q, int):
        raise TypeError("rat() takes integer numerator and denominator")
    return Fraction(p, q)


def rat_arith(lhs: Fraction, rhs: Fraction, op: str) -> Fraction:
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unsupported operator {op!r}") from None
    return fn(Fraction(lhs), Fraction(rhs))


def parse_rational(text: str) -> Fraction:
    """Parse the strict ``p/q`` form (optional leading minus, no whitespace)."""
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    return Fraction(text)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_scalar(text: str, mode: Mode | str) -> Scalar:
    """Parse a textual scalar in the given mode.

    Exact mode only accepts ``p/q`` literals.  Float mode additionally
    accepts decimal and scientific notation.
    """
    mode = Mode.coerce(mode)
    if mode is Mode.EXACT:
        return parse_rational(text)
    if _RATIONAL_RE.match(text):
        return float(Fraction(text))
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite scalar {text!r}")
    return value


def format_scalar(value: Scalar) -> str:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def to_mode(value, mode: Mode | str) -> Scalar:
    """Convert an int/Fraction/float/str to a scalar of the requested mode."""
    mode = Mode.coerce(mode)
    if isinstance(value, str):
        return parse_scalar(value, mode)
    if mode is Mode.EXACT:
        if isinstance(value, float):
            raise TypeError("exact mode requires rational input, got a float")
        return Fraction(value)
    return float(value)


def mode_of(value: Scalar) -> Mode:
    if isinstance(value, (Fraction, int)):
        return Mode.EXACT
    return Mode.FLOAT


def zero(mode: Mode | str) -> Scalar:
    return Fraction(0) if Mode.coerce(mode) is Mode.EXACT else 0.0


def one(mode: Mode | str) -> Scalar:
    return Fraction(1) if Mode.coerce(mode) is Mode.EXACT else 1.0
