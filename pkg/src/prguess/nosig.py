"""Linear equality rows for the four no-signaling regimes on an n-round behavior.

Each regime is a list of *families*.  A family keeps some output bits, sums
out the others, and requires the resulting marginal to be independent of a
set of *signaling* inputs.  Rows are emitted as differences against the
reference assignment where every signaling input is 0, which is enough to
force equality across all values of those inputs.

Canonical row order: family in definition order (Alice-side equation first),
then round index ascending, then the free assignment (kept outputs and
non-signaling inputs) by its flat encoding, then the signaling value
ascending.  Rows are canonicalized (sorted columns, leading coefficient +1)
and exact duplicates are dropped; distinct but dependent rows are kept.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .behavior import Behavior
from .numeric import Mode, Scalar, format_scalar, parse_scalar
from .validation import check_rounds


class ScenarioKind(str, enum.Enum):
    FULLNS = "fullns"
    ABNS = "abns"
    TONS = "tons"
    WTONS = "wtons"

    @classmethod
    def coerce(cls, value) -> "ScenarioKind":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(
                f"unknown scenario {value!r}; expected one of fullns, abns, tons, wtons"
            ) from None


class Family(NamedTuple):
    name: str
    side: str
    round: int
    keep_a: frozenset
    keep_b: frozenset
    signal_x: frozenset
    signal_y: frozenset


class RowLabel(NamedTuple):
    family: str
    round: int
    free: int
    signal: int


def _rng(lo: int, hi: int) -> frozenset:
    return frozenset(range(lo, hi + 1))


def families(n: int, kind: ScenarioKind | str) -> list[Family]:
    """The marginal-independence families of a regime, in canonical order."""
    kind = ScenarioKind.coerce(kind)
    every = _rng(1, n)
    none = frozenset()
    if kind is ScenarioKind.FULLNS:
        alice = [Family("fullns", "alice", i, every - {i}, every, frozenset({i}), none) for i in every]
        bob = [Family("fullns", "bob", i, every, every - {i}, none, frozenset({i})) for i in every]
    elif kind is ScenarioKind.ABNS:
        alice = [Family("abns", "alice", 0, none, every, every, none)]
        bob = [Family("abns", "bob", 0, every, none, none, every)]
    elif kind is ScenarioKind.TONS:
        alice = [Family("tons", "alice", i, _rng(1, i), every, _rng(i + 1, n), none) for i in range(n)]
        bob = [Family("tons", "bob", i, every, _rng(1, i), none, _rng(i + 1, n)) for i in range(n)]
    else:
        alice = [
            Family("wtons", "alice", i, _rng(1, i), _rng(1, i + 1), _rng(i + 1, n), _rng(i + 2, n))
            for i in range(n)
        ]
        bob = [
            Family("wtons", "bob", i, _rng(1, i + 1), _rng(1, i), _rng(i + 2, n), _rng(i + 1, n))
            for i in range(n)
        ]
    return sorted(alice + bob, key=lambda f: (f.side != "alice", f.round))


def _family_blocks(n: int, fam: Family) -> np.ndarray:
    """Index tensor of shape (free, signal, summed) for one family."""
    idx = np.arange(16**n, dtype=np.int64).reshape((2,) * (4 * n))
    summed = [i - 1 for i in range(1, n + 1) if i not in fam.keep_a]
    summed += [n + i - 1 for i in range(1, n + 1) if i not in fam.keep_b]
    signal = [2 * n + i - 1 for i in sorted(fam.signal_x)] + [3 * n + i - 1 for i in sorted(fam.signal_y)]
    free = [ax for ax in range(4 * n) if ax not in summed and ax not in signal]
    t = idx.transpose(free + signal + summed)
    return t.reshape(2 ** len(free), 2 ** len(signal), 2 ** len(summed))


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Sparse integer equality rows ``A p = b`` in CSR layout plus row labels."""

    num_vars: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    rhs: tuple
    families: tuple
    label_family: np.ndarray
    label_round: np.ndarray
    label_free: np.ndarray
    label_signal: np.ndarray
    mode: Mode = Mode.EXACT

    @property
    def num_rows(self) -> int:
        return len(self.indptr) - 1

    def __len__(self) -> int:
        return self.num_rows

    def row(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[r], self.indptr[r + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def label(self, r: int) -> RowLabel:
        return RowLabel(
            self.families[self.label_family[r]],
            int(self.label_round[r]),
            int(self.label_free[r]),
            int(self.label_signal[r]),
        )

    def labels(self) -> list[RowLabel]:
        return [self.label(r) for r in range(self.num_rows)]

    def row_keys(self) -> list[tuple]:
        """Hashable (columns, coefficients, rhs) per row, for set comparisons."""
        return [
            (tuple(self.row(r)[0].tolist()), tuple(self.row(r)[1].tolist()), self.rhs[r])
            for r in range(self.num_rows)
        ]

    def to_csr(self, dtype=float) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.data.astype(dtype), self.indices, self.indptr), shape=(self.num_rows, self.num_vars)
        )

    def select(self, rows: Sequence[int]) -> "ConstraintSystem":
        rows = list(rows)
        parts = [self.row(r) for r in rows]
        return _build(
            self.num_vars,
            [p[0] for p in parts],
            [p[1] for p in parts],
            [self.rhs[r] for r in rows],
            [self.label(r) for r in rows],
            self.mode,
        )

    def residuals(self, values) -> list:
        """Exact (or float) ``A p - b`` per row for a behavior or raw vector."""
        p = values.entries if isinstance(values, Behavior) else np.asarray(values)
        if len(p) != self.num_vars:
            raise ValueError(f"vector of length {len(p)} does not match {self.num_vars} variables")
        if p.dtype == object:
            out = []
            for r in range(self.num_rows):
                lo, hi = self.indptr[r], self.indptr[r + 1]
                acc = Fraction(0)
                for j, c in zip(self.indices[lo:hi].tolist(), self.data[lo:hi].tolist()):
                    acc += c * p[j]
                out.append(acc - self.rhs[r])
            return out
        ap = self.to_csr() @ p.astype(float)
        return list(ap - np.array([float(b) for b in self.rhs]))

    def is_satisfied(self, values, tol: float = 0.0) -> bool:
        res = self.residuals(values)
        if tol == 0.0:
            return all(r == 0 for r in res)
        return all(abs(float(r)) <= tol for r in res)

    def canonical_bytes(self) -> bytes:
        h = hashlib.sha256()
        h.update(f"vars={self.num_vars};rows={self.num_rows};".encode())
        h.update(";".join(self.families).encode())
        for arr in (self.label_family, self.label_round, self.label_free, self.label_signal,
                    self.indptr, self.indices, self.data):
            h.update(np.ascontiguousarray(arr, dtype="<i8").tobytes())
        h.update("|".join(format_scalar(b) for b in self.rhs).encode())
        return h.digest()

    def order_hash(self) -> str:
        """SHA-256 binding row labels, sparse entries and right-hand sides in canonical order."""
        return self.canonical_bytes().hex()

    def to_dict(self) -> dict:
        rows = []
        for r in range(self.num_rows):
            cols, coefs = self.row(r)
            lab = self.label(r)
            rows.append({
                "label": {"family": lab.family, "round": lab.round, "free": lab.free, "signal": lab.signal},
                "entries": [[int(j), format_scalar(Fraction(int(c)))] for j, c in zip(cols, coefs)],
                "rhs": format_scalar(self.rhs[r]),
            })
        return {"num_vars": self.num_vars, "mode": self.mode.value, "order_hash": self.order_hash(), "rows": rows}

    @classmethod
    def from_dict(cls, data: dict) -> "ConstraintSystem":
        mode = Mode.coerce(data.get("mode", "exact"))
        cols, coefs, rhs, labels = [], [], [], []
        for row in data["rows"]:
            cols.append(np.array([int(e[0]) for e in row["entries"]], dtype=np.int64))
            coefs.append(np.array([int(Fraction(e[1])) for e in row["entries"]], dtype=np.int64))
            rhs.append(parse_scalar(row["rhs"], mode))
            lab = row["label"]
            labels.append(RowLabel(lab["family"], lab["round"], lab["free"], lab["signal"]))
        return _build(int(data["num_vars"]), cols, coefs, rhs, labels, mode)


def _build(num_vars, cols_list, coef_list, rhs, labels, mode) -> ConstraintSystem:
    fam_names: list[str] = []
    fam_ids = []
    for lab in labels:
        if lab.family not in fam_names:
            fam_names.append(lab.family)
        fam_ids.append(fam_names.index(lab.family))
    lengths = [len(c) for c in cols_list]
    indptr = np.zeros(len(cols_list) + 1, dtype=np.int64)
    np.cumsum(lengths, out=indptr[1:])
    indices = np.concatenate(cols_list) if cols_list else np.zeros(0, dtype=np.int64)
    data = np.concatenate(coef_list) if coef_list else np.zeros(0, dtype=np.int64)
    return _from_arrays(num_vars, indptr, indices, data, rhs, fam_names, fam_ids,
                        [lab.round for lab in labels], [lab.free for lab in labels],
                        [lab.signal for lab in labels], mode)


def _from_arrays(num_vars, indptr, indices, data, rhs, fam_names, fam_ids, rounds, free, signal, mode):
    if len(indices) and (indices.min() < 0 or indices.max() >= num_vars):
        raise ValueError("column index out of range")
    return ConstraintSystem(
        num_vars=num_vars,
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int64),
        data=np.asarray(data, dtype=np.int64),
        rhs=tuple(rhs),
        families=tuple(fam_names),
        label_family=np.asarray(fam_ids, dtype=np.int64),
        label_round=np.asarray(rounds, dtype=np.int64),
        label_free=np.asarray(free, dtype=np.int64),
        label_signal=np.asarray(signal, dtype=np.int64),
        mode=mode,
    )


def raw_family_rows(n: int, fam: Family) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows of one family before canonicalization.

    Returns ``(cols, coefs, labels)`` where ``cols`` has shape (rows, 2m):
    the signaling-value block (+1) followed by the reference block (-1), and
    ``labels`` holds (free, signal) per row.
    """
    t = _family_blocks(n, fam)
    nfree, nsig, nsum = t.shape
    ref = np.repeat(t[:, :1, :], nsig - 1, axis=1)
    cols = np.concatenate([t[:, 1:, :], ref], axis=2).reshape(-1, 2 * nsum)
    coefs = np.concatenate([np.ones(nsum, np.int64), -np.ones(nsum, np.int64)])
    free = np.repeat(t[:, 0, 0], nsig - 1)
    signal = np.tile(np.arange(1, nsig, dtype=np.int64), nfree)
    return cols, np.broadcast_to(coefs, cols.shape), np.stack([free, signal], axis=1)


def scenario_rows(n: int, kind: ScenarioKind | str, mode: Mode | str = Mode.EXACT) -> ConstraintSystem:
    """All no-signaling rows of a regime on n-round behaviors, deduplicated."""
    n = check_rounds(n)
    kind = ScenarioKind.coerce(kind)
    mode = Mode.coerce(mode)
    seen: set[bytes] = set()
    fam_names: list[str] = []
    cols_out, coef_out, ids, rounds, frees, signals = [], [], [], [], [], []
    for fam in families(n, kind):
        name = f"{fam.name}.{fam.side}"
        if name not in fam_names:
            fam_names.append(name)
        cols, coefs, labels = raw_family_rows(n, fam)
        order = np.argsort(cols, axis=1, kind="stable")
        cols = np.take_along_axis(cols, order, axis=1)
        coefs = np.take_along_axis(coefs, order, axis=1)
        coefs = coefs * np.sign(coefs[:, :1])
        keep = []
        for r in range(cols.shape[0]):
            key = cols[r].tobytes() + coefs[r].tobytes()
            if key not in seen:
                seen.add(key)
                keep.append(r)
        keep = np.asarray(keep, dtype=np.int64)
        cols_out.append(cols[keep])
        coef_out.append(coefs[keep])
        ids.append(np.full(len(keep), fam_names.index(name), dtype=np.int64))
        rounds.append(np.full(len(keep), fam.round, dtype=np.int64))
        frees.append(labels[keep, 0])
        signals.append(labels[keep, 1])
    lengths = np.concatenate([np.full(c.shape[0], c.shape[1], dtype=np.int64) for c in cols_out])
    indptr = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=indptr[1:])
    indices = np.concatenate([c.reshape(-1) for c in cols_out])
    data = np.concatenate([c.reshape(-1) for c in coef_out])
    zero = Fraction(0) if mode is Mode.EXACT else 0.0
    return _from_arrays(
        16**n, indptr, indices, data, [zero] * len(lengths), fam_names,
        np.concatenate(ids), np.concatenate(rounds), np.concatenate(frees), np.concatenate(signals), mode,
    )


def normalization_rows(n: int, mode: Mode | str = Mode.EXACT) -> ConstraintSystem:
    """sum_{a,b} P(a,b|x,y) = 1 for every (x, y), in ascending (x, y) order."""
    n = check_rounds(n)
    mode = Mode.coerce(mode)
    one = Fraction(1) if Mode.coerce(mode) is Mode.EXACT else 1.0
    idx = np.arange(16**n, dtype=np.int64).reshape(4**n, 4**n)
    cols = [idx[:, xy].copy() for xy in range(4**n)]
    coefs = [np.ones(4**n, dtype=np.int64)] * 4**n
    labels = [RowLabel("norm", 0, int(idx[0, xy]), 0) for xy in range(4**n)]
    return _build(16**n, cols, coefs, [one] * 4**n, labels, mode)


def stack(systems: Iterable[ConstraintSystem]) -> ConstraintSystem:
    """Concatenate row blocks over the same variables, preserving order."""
    systems = list(systems)
    if not systems:
        raise ValueError("nothing to stack")
    num_vars = systems[0].num_vars
    if any(s.num_vars != num_vars for s in systems):
        raise ValueError("systems have different variable counts")
    fam_names: list[str] = []
    ids = []
    for s in systems:
        remap = []
        for name in s.families:
            if name not in fam_names:
                fam_names.append(name)
            remap.append(fam_names.index(name))
        ids.append(np.asarray(remap, dtype=np.int64)[s.label_family] if s.num_rows else np.zeros(0, np.int64))
    offsets = np.cumsum([0] + [len(s.indices) for s in systems])
    indptr = np.concatenate([[0]] + [s.indptr[1:] + off for s, off in zip(systems, offsets[:-1])])
    return _from_arrays(
        num_vars, indptr,
        np.concatenate([s.indices for s in systems]),
        np.concatenate([s.data for s in systems]),
        [b for s in systems for b in s.rhs], fam_names, np.concatenate(ids),
        np.concatenate([s.label_round for s in systems]),
        np.concatenate([s.label_free for s in systems]),
        np.concatenate([s.label_signal for s in systems]),
        systems[0].mode,
    )


def residuals(sys_: ConstraintSystem, beh: Behavior) -> list[Scalar]:
    if isinstance(beh, Behavior) and 16**beh.n != sys_.num_vars:
        raise ValueError(f"behavior with n={beh.n} does not match a system over {sys_.num_vars} variables")
    return sys_.residuals(beh)


def exact_rank(rows: Sequence[dict]) -> int:
    """Rank of sparse integer/rational rows (dicts column -> value) by exact elimination.

    Each pivot eliminates its column from the remaining rows with
    fraction-free integer updates, so no rational arithmetic is needed for
    integer input.
    """
    pivots: dict[int, dict] = {}
    rank = 0
    for row in rows:
        vec = {j: v for j, v in row.items() if v != 0}
        while vec:
            col = min(vec)
            piv = pivots.get(col)
            if piv is None:
                pivots[col] = vec
                rank += 1
                break
            f, g = vec[col], piv[col]
            new = {j: g * v for j, v in vec.items()}
            for j, v in piv.items():
                val = new.get(j, 0) - f * v
                if val:
                    new[j] = val
                else:
                    new.pop(j, None)
            vec = _reduce_content(new)
    return rank


def _reduce_content(vec: dict) -> dict:
    if not vec:
        return vec
    if all(isinstance(v, int) for v in vec.values()):
        import math

        g = 0
        for v in vec.values():
            g = math.gcd(g, v)
        if g > 1:
            return {j: v // g for j, v in vec.items()}
    return vec


def system_rows_as_dicts(sys_: ConstraintSystem) -> list[dict]:
    return [dict(zip(c.tolist(), d.tolist())) for c, d in (sys_.row(r) for r in range(sys_.num_rows))]
