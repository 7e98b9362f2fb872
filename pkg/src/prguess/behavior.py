"""n-round conditional probability tables P(a, b | x, y) over binary strings.

Entries are stored densely.  The flat index of (a, b, x, y) is
``a * 2**(3n) + b * 2**(2n) + x * 2**n + y`` where each n-bit string is read
as an unsigned integer with round 1 as the most significant bit.  Reshaping
the flat vector to ``(2,) * 4n`` in C order therefore gives one axis per bit,
ordered a_1..a_n, b_1..b_n, x_1..x_n, y_1..y_n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .numeric import Mode, Scalar, format_scalar, mode_of, parse_scalar
from .validation import check_bits, check_noise, check_round_index


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _empty(size: int, mode: Mode) -> np.ndarray:
    if mode is Mode.EXACT:
        out = np.empty(size, dtype=object)
        out[:] = Fraction(0)
        return out
    return np.zeros(size, dtype=float)


@dataclass(frozen=True, eq=False)
class Behavior:
    n: int
    entries: np.ndarray
    mode: Mode = Mode.EXACT

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.shape != (16**self.n,):
            raise ValueError(f"expected {16**self.n} entries for n={self.n}, got shape {entries.shape}")
        if self.mode is Mode.EXACT and entries.dtype != object:
            raise TypeError("exact behaviors must hold Fraction entries")
        if not entries.flags.writeable:
            object.__setattr__(self, "entries", entries)
        else:
            object.__setattr__(self, "entries", _freeze(entries.copy()))

    @classmethod
    def from_function(cls, n: int, fn, mode: Mode = Mode.EXACT) -> "Behavior":
        """Build a behavior from ``fn(a, b, x, y)`` with integer bit strings."""
        size = 16**n
        out = _empty(size, mode)
        for k in range(size):
            a, b, x, y = unpack_index(k, n)
            out[k] = fn(a, b, x, y)
        return cls(n, out, mode)

    def tensor(self) -> np.ndarray:
        return self.entries.reshape((2,) * (4 * self.n))

    def __getitem__(self, abxy) -> Scalar:
        a, b, x, y = abxy
        return self.entries[flat_index(a, b, x, y, self.n)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Behavior):
            return NotImplemented
        return self.n == other.n and bool(np.all(self.entries == other.entries))

    def __hash__(self):
        return hash((self.n, tuple(self.entries.tolist())))

    def permuted(self, src: np.ndarray) -> "Behavior":
        """New behavior with ``new[k] = old[src[k]]``."""
        return Behavior(self.n, self.entries[src], self.mode)

    def flipped_outputs(self, alpha: int) -> "Behavior":
        return self.permuted(_output_flip_source(self.n, alpha))

    def input_sums(self) -> np.ndarray:
        """Sum over (a, b) for each (x, y); shape (2**n, 2**n)."""
        blocks = self.entries.reshape(4**self.n, 4**self.n)
        return blocks.sum(axis=0).reshape(2**self.n, 2**self.n)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        sums = self.input_sums().ravel()
        if self.mode is Mode.EXACT:
            return all(s == 1 for s in sums)
        return bool(np.all(np.abs(sums.astype(float) - 1.0) <= tol))

    def is_nonnegative(self) -> bool:
        return all(e >= 0 for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode.value,
            "entries": [format_scalar(e) for e in self.entries],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Behavior":
        mode = Mode.coerce(data.get("mode", "exact"))
        n = int(data["n"])
        values = [parse_scalar(str(s), mode) for s in data["entries"]]
        entries = np.empty(len(values), dtype=object if mode is Mode.EXACT else float)
        entries[:] = values
        return cls(n, entries, mode)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Behavior":
        return cls.from_dict(json.loads(text))


def flat_index(a: int, b: int, x: int, y: int, n: int) -> int:
    return ((a << n | b) << n | x) << n | y


def unpack_index(k: int, n: int) -> tuple[int, int, int, int]:
    mask = (1 << n) - 1
    return (k >> 3 * n) & mask, (k >> 2 * n) & mask, (k >> n) & mask, k & mask


def round_bit(i: int, n: int) -> int:
    """Mask of round ``i`` (1-based) inside an n-bit string."""
    return 1 << (n - i)


def _index_fields(n: int):
    k = np.arange(16**n, dtype=np.int64)
    mask = (1 << n) - 1
    return k, (k >> 3 * n) & mask, (k >> 2 * n) & mask, (k >> n) & mask, k & mask


def _pack(a, b, x, y, n):
    return ((a << n | b) << n | x) << n | y


def _output_flip_source(n: int, alpha: int) -> np.ndarray:
    _, a, b, x, y = _index_fields(n)
    return _pack(a ^ alpha, b ^ alpha, x, y, n)


def pr_box(v, mode: Mode | str | None = None) -> Behavior:
    """Noisy PR box: (3+v)/8 when a xor b = x and y, (1-v)/8 otherwise."""
    v = check_noise(v, mode)
    md = mode_of(v)
    win = (3 + v) / 8
    lose = (1 - v) / 8
    return Behavior.from_function(1, lambda a, b, x, y: win if a ^ b == x & y else lose, md)


_DETERMINISTIC = {
    1: lambda a, b, x, y: a == 0 and b == 0,
    2: lambda a, b, x, y: a == x and b == 0,
    3: lambda a, b, x, y: a == 0 and b == y,
    4: lambda a, b, x, y: a == x and b == y ^ 1,
}


def deterministic_box(kind: int, mode: Mode | str = Mode.EXACT) -> Behavior:
    """One of the four local deterministic boxes D_1..D_4 saturating CHSH = 2."""
    if kind not in _DETERMINISTIC:
        raise ValueError(f"deterministic box kind must be 1..4, got {kind!r}")
    mode = Mode.coerce(mode)
    one, nil = (Fraction(1), Fraction(0)) if mode is Mode.EXACT else (1.0, 0.0)
    rule = _DETERMINISTIC[kind]
    return Behavior.from_function(1, lambda a, b, x, y: one if rule(a, b, x, y) else nil, mode)


def chsh_value(beh: Behavior) -> Scalar:
    """CHSH score sum_{x,y} (-1)^{xy} <(-1)^{a+b}>_{xy} of a single-round behavior."""
    if beh.n != 1:
        raise ValueError("CHSH value is defined for single-round behaviors")
    total = 0
    for a in (0, 1):
        for b in (0, 1):
            for x in (0, 1):
                for y in (0, 1):
                    total += (-1) ** (a ^ b ^ (x & y)) * beh[a, b, x, y]
    return total


def product(factors: Sequence[Behavior]) -> Behavior:
    """Concatenate independent behaviors round-wise.

    The entry at (a, b, x, y) is the product of each factor's entry on its own
    block of rounds; factors may have any number of rounds.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("product() needs at least one factor")
    modes = {f.mode for f in factors}
    if len(modes) != 1:
        raise ValueError("cannot mix exact and float behaviors in a product")
    out = factors[0].tensor()
    for f in factors[1:]:
        out = np.multiply.outer(out, f.tensor())
    # group the per-factor (a, b, x, y) axis blocks by variable
    axes: list[list[int]] = [[], [], [], []]
    offset = 0
    for f in factors:
        for var in range(4):
            axes[var].extend(range(offset + var * f.n, offset + (var + 1) * f.n))
        offset += 4 * f.n
    order = [ax for block in axes for ax in block]
    n = sum(f.n for f in factors)
    flat = np.ascontiguousarray(out.transpose(order)).reshape(-1)
    return Behavior(n, flat, modes.pop())


def pr_product(v, n: int, mode: Mode | str | None = None) -> Behavior:
    return product([pr_box(v, mode)] * n)


def mix(weights: Sequence[Scalar], behaviors: Sequence[Behavior]) -> Behavior:
    """Weighted sum of behaviors (no normalization check)."""
    if len(weights) != len(behaviors) or not behaviors:
        raise ValueError("weights and behaviors must be non-empty and of equal length")
    n, mode = behaviors[0].n, behaviors[0].mode
    acc = _empty(16**n, mode)
    for w, beh in zip(weights, behaviors):
        if beh.n != n or beh.mode is not mode:
            raise ValueError("mixed behaviors must share n and mode")
        acc = acc + w * beh.entries
    return Behavior(n, acc, mode)


def marginal(
    beh: Behavior,
    keep_a: Iterable[int] = (),
    keep_b: Iterable[int] = (),
    fixed_inputs: Mapping[str, int] | None = None,
) -> np.ndarray:
    """Sum out the dropped output bits and fix some inputs.

    ``keep_a``/``keep_b`` are 1-based round indices of the output bits that
    survive.  ``fixed_inputs`` maps names like ``"x2"`` or ``"y1"`` to a bit.
    The result has one axis per kept a-bit, kept b-bit, free x-bit and free
    y-bit, in that order and by ascending round.
    """
    n = beh.n
    keep_a = sorted(check_round_index(i, n) for i in keep_a)
    keep_b = sorted(check_round_index(i, n) for i in keep_b)
    if len(set(keep_a)) != len(keep_a) or len(set(keep_b)) != len(keep_b):
        raise ValueError("duplicate round index in kept outputs")
    fixed = dict(fixed_inputs or {})
    index: list = [slice(None)] * (4 * n)
    for name, bit in fixed.items():
        if len(name) < 2 or name[0] not in "xy" or not name[1:].isdigit():
            raise ValueError(f"bad input name {name!r}; expected e.g. 'x1' or 'y2'")
        i = check_round_index(int(name[1:]), n)
        if bit not in (0, 1):
            raise ValueError(f"input {name} must be fixed to 0 or 1")
        index[(2 if name[0] == "x" else 3) * n + i - 1] = bit
    t = beh.tensor()
    drop = [i - 1 for i in range(1, n + 1) if i not in keep_a]
    drop += [n + i - 1 for i in range(1, n + 1) if i not in keep_b]
    if drop:
        t = t.sum(axis=tuple(drop))
        kept_axes = [ax for ax in range(4 * n) if ax not in drop]
        index = [index[ax] for ax in kept_axes]
    return t[tuple(index)]


@dataclass(frozen=True, eq=False)
class AttackDecomposition:
    """Convex decomposition sum_alpha P(alpha) P_alpha of a target behavior."""

    n: int
    weights: tuple
    guesses: tuple
    behaviors: tuple
    target: Behavior | None = field(default=None)

    def mixture(self) -> Behavior:
        return mix(self.weights, self.behaviors)

    def objective(self, x_star: int | str = 0, y_star: int | str = 0) -> Scalar:
        """Probability that Alice's output equals the guess, at inputs (x*, y*)."""
        x_star = check_bits(x_star, self.n, "x*")
        y_star = check_bits(y_star, self.n, "y*")
        total = 0
        for w, alpha, beh in zip(self.weights, self.guesses, self.behaviors):
            for b in range(2**self.n):
                total += w * beh[alpha, b, x_star, y_star]
        return total

    def check(self) -> None:
        """Raise ValueError unless the decomposition is a valid convex split of its target."""
        if any(w < 0 for w in self.weights):
            raise ValueError("negative weight")
        if sum(self.weights) != 1 and abs(float(sum(self.weights)) - 1) > 1e-12:
            raise ValueError("weights do not sum to 1")
        for beh in self.behaviors:
            if not beh.is_normalized() or not beh.is_nonnegative():
                raise ValueError("component is not a normalized behavior")
        if self.target is not None and self.mixture() != self.target:
            if self.target.mode is Mode.EXACT:
                raise ValueError("mixture differs from target")
            diff = self.mixture().entries.astype(float) - self.target.entries.astype(float)
            if np.max(np.abs(diff)) > 1e-12:
                raise ValueError("mixture differs from target")


def single_round_attack(v, mode: Mode | str | None = None) -> AttackDecomposition:
    """Two-outcome decomposition of PR_v reaching guessing probability 1 - v/2."""
    v = check_noise(v, mode, low=0, high=1)
    md = mode_of(v)
    dets = [deterministic_box(k, md) for k in (1, 2, 3, 4)]
    quarter = (1 - v) / 4
    p0 = mix([quarter] * 4 + [v], dets + [pr_box(1 if md is Mode.EXACT else 1.0, md)])
    p1 = p0.flipped_outputs(1)
    half = Fraction(1, 2) if md is Mode.EXACT else 0.5
    return AttackDecomposition(1, (half, half), (0, 1), (p0, p1), pr_box(v, md))


def _transform_source(n: int, kind: str, i: int) -> np.ndarray:
    bit = round_bit(i, n)
    _, a, b, x, y = _index_fields(n)
    if kind == "T1":
        return _pack(a ^ bit, b ^ bit, x, y, n)
    if kind == "T2":
        return _pack(a ^ (x & bit), b, x, y ^ bit, n)
    if kind == "T3":
        return _pack(a, b ^ (y & bit), x ^ bit, y, n)
    raise ValueError(f"unknown transform {kind!r}; expected T1, T2 or T3")


def apply_transform(obj, kind: str, i: int):
    """Apply a round-local symmetry to a behavior or a decomposition.

    T1 flips a_i and b_i (and the guessed bit alpha_i of a decomposition),
    T2 maps a_i -> a_i xor x_i and flips y_i, T3 maps b_i -> b_i xor y_i and
    flips x_i.  All three are involutions.
    """
    kind = kind.upper()
    i = check_round_index(i, obj.n)
    src = _transform_source(obj.n, kind, i)
    if isinstance(obj, Behavior):
        return obj.permuted(src)
    if isinstance(obj, AttackDecomposition):
        guesses = obj.guesses
        if kind == "T1":
            guesses = tuple(g ^ round_bit(i, obj.n) for g in guesses)
        target = obj.target.permuted(src) if obj.target is not None else None
        return AttackDecomposition(
            obj.n, obj.weights, guesses, tuple(b.permuted(src) for b in obj.behaviors), target
        )
    raise TypeError(f"cannot transform {type(obj).__name__}")


def reduced_lift(p0: Behavior, target: Behavior | None = None) -> AttackDecomposition:
    """Expand a reduced behavior into the uniform 2^n-component decomposition.

    Component alpha is p0 with every output bit a_i, b_i flipped where
    alpha_i = 1.
    """
    n = p0.n
    w = Fraction(1, 2**n) if p0.mode is Mode.EXACT else 1.0 / 2**n
    comps = tuple(p0.flipped_outputs(alpha) for alpha in range(2**n))
    return AttackDecomposition(n, (w,) * 2**n, tuple(range(2**n)), comps, target)
