"""Input validation shared by the library entry points, the estimator and the CLI."""

from __future__ import annotations

from fractions import Fraction

from .numeric import Mode, Scalar, to_mode

MAX_ROUNDS = 5


def check_rounds(n, max_rounds: int = MAX_ROUNDS) -> int:
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError(f"number of rounds must be an int, got {type(n).__name__}")
    if not 1 <= n <= max_rounds:
        raise ValueError(f"number of rounds must lie in [1, {max_rounds}], got {n}")
    return n


def check_noise(v, mode: Mode | str | None = None, *, low=-1, high=1) -> Scalar:
    """Validate a noise parameter and convert it to the requested mode.

    With ``mode=None`` the mode is inferred: floats stay floats, everything
    else becomes a Fraction.
    """
    if mode is None:
        mode = Mode.FLOAT if isinstance(v, float) else Mode.EXACT
    value = to_mode(v, mode)
    if value != value or not low <= value <= high:
        raise ValueError(f"noise parameter v={v} outside [{low}, {high}]")
    return value


def check_bits(value, n: int, name: str = "bit string") -> int:
    """Accept an int in [0, 2^n) or a string of n binary digits."""
    if isinstance(value, str):
        if len(value) != n or set(value) - {"0", "1"}:
            raise ValueError(f"{name} must be {n} binary digits, got {value!r}")
        return int(value, 2)
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{name} must be an int or a binary string")
    if not 0 <= value < 2**n:
        raise ValueError(f"{name} {value} out of range for n={n}")
    return value


def check_round_index(i, n: int) -> int:
    if isinstance(i, bool) or not isinstance(i, int) or not 1 <= i <= n:
        raise ValueError(f"round index must be in [1, {n}], got {i!r}")
    return i


def is_rational(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)
