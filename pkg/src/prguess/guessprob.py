"""Guessing-probability LPs for n copies of the noisy PR box.

Two formulations are assembled:

* reduced: a single behavior P (the alpha = 0 component), with the
  symmetric lift P_alpha(a, b|x, y) = P(a xor alpha, b xor alpha|x, y) and
  uniform weights implied.  Marginal rows
  ``sum_a P(a, a xor b|x, y) = 2^n prod_i PR_v(0, b_i|x_i, y_i)`` for every
  (x, y, b), then the regime's no-signaling rows; objective
  ``sum_b P(0, b|0, 0)``.
* full: one unnormalized behavior per guess alpha, each constrained by the
  regime's rows, plus ``sum_alpha P~_alpha = PR_v^{(n)}`` entrywise; objective
  ``sum_alpha sum_b P~_alpha(alpha, b|x*, y*)``.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .behavior import Behavior, flat_index, pr_product
from .lp import LpProblem, LpSolution, LpStatus, LpError, solve
from .nosig import ConstraintSystem, RowLabel, ScenarioKind, _build, _from_arrays, scenario_rows, stack
from .numeric import Mode, Scalar, format_scalar, to_mode
from .validation import check_bits, check_noise, check_rounds

log = logging.getLogger(__name__)

SQRT2_MINUS_1 = math.sqrt(2) - 1
SQRT5_MINUS_2 = math.sqrt(5) - 2


def _v_for(v, mode):
    return check_noise(v, mode, low=0, high=1)


def _pr_zero_b(v, b: int, x: int, y: int, n: int):
    """prod_i PR_v(0, b_i | x_i, y_i)."""
    win, lose = (3 + v) / 8, (1 - v) / 8
    out = 1
    for i in range(n):
        s = n - 1 - i
        bi, xi, yi = (b >> s) & 1, (x >> s) & 1, (y >> s) & 1
        out = out * (win if bi == (xi & yi) else lose)
    return out


def marginal_rows(n: int, v, mode: Mode = Mode.EXACT) -> ConstraintSystem:
    """Reduced-space marginal rows in lexicographic (x, y, b) order."""
    size = 2**n
    cols, coefs, rhs, labels = [], [], [], []
    scale = 2**n
    ones = np.ones(size, dtype=np.int64)
    a = np.arange(size, dtype=np.int64)
    for x in range(size):
        for y in range(size):
            for b in range(size):
                idx = ((a << n | (a ^ b)) << n | x) << n | y
                cols.append(np.sort(idx))
                coefs.append(ones)
                rhs.append(scale * _pr_zero_b(v, b, x, y, n))
                labels.append(RowLabel("marginal", 0, flat_index(0, b, x, y, n), 0))
    return _build(16**n, cols, coefs, rhs, labels, mode)


def reduced_objective(n: int) -> dict:
    one = 1
    return {flat_index(0, b, 0, 0, n): one for b in range(2**n)}


def assemble_reduced(n: int, scenario, v, mode: Mode | str | None = None) -> LpProblem:
    n = check_rounds(n)
    scenario = ScenarioKind.coerce(scenario)
    if mode is None:
        mode = Mode.FLOAT if isinstance(v, float) else Mode.EXACT
    mode = Mode.coerce(mode)
    v = _v_for(v, mode)
    system = stack([marginal_rows(n, v, mode), scenario_rows(n, scenario, mode)])
    one = Fraction(1) if mode is Mode.EXACT else 1.0
    return LpProblem(system, {j: one for j in reduced_objective(n)}, mode)


def _shift(sys_: ConstraintSystem, offset: int, num_vars: int, tag: str) -> ConstraintSystem:
    return _from_arrays(
        num_vars, sys_.indptr, sys_.indices + offset, sys_.data, sys_.rhs,
        [f"{name}@{tag}" for name in sys_.families], sys_.label_family,
        sys_.label_round, sys_.label_free, sys_.label_signal, sys_.mode,
    )


def assemble_full(n: int, scenario, v, x_star=0, y_star=0, mode: Mode | str | None = None) -> LpProblem:
    """Unreduced LP over one unnormalized behavior per guess alpha."""
    n = check_rounds(n)
    scenario = ScenarioKind.coerce(scenario)
    x_star = check_bits(x_star, n, "x*")
    y_star = check_bits(y_star, n, "y*")
    if mode is None:
        mode = Mode.FLOAT if isinstance(v, float) else Mode.EXACT
    mode = Mode.coerce(mode)
    v = _v_for(v, mode)
    block = 16**n
    total = block * 2**n
    base = scenario_rows(n, scenario, mode)
    parts = [_shift(base, alpha * block, total, str(alpha)) for alpha in range(2**n)]
    target = pr_product(v, n, mode)
    alphas = np.arange(2**n, dtype=np.int64) * block
    cols = [alphas + k for k in range(block)]
    coefs = [np.ones(2**n, dtype=np.int64)] * block
    labels = [RowLabel("marginal", 0, k, 0) for k in range(block)]
    parts.append(_build(total, cols, coefs, list(target.entries), labels, mode))
    one = Fraction(1) if mode is Mode.EXACT else 1.0
    objective = {
        alpha * block + flat_index(alpha, b, x_star, y_star, n): one
        for alpha in range(2**n)
        for b in range(2**n)
    }
    return LpProblem(stack(parts), objective, mode)


def full_solution_components(sol: LpSolution, n: int) -> list[Behavior]:
    """Split a full-formulation primal vector into its 2^n unnormalized blocks."""
    block = 16**n
    p = sol.primal_vector(block * 2**n)
    return [Behavior(n, p[alpha * block:(alpha + 1) * block].copy(), sol.mode) for alpha in range(2**n)]


def reduced_solution_behavior(sol: LpSolution, n: int) -> Behavior:
    return Behavior(n, sol.primal_vector(16**n), sol.mode)


# ---------------------------------------------------------------------------
# bounds and analytic values


def trivial_bounds(n: int, v) -> tuple:
    """((1 - v/2)^n, 1 - v/2)."""
    n = check_rounds(n, max_rounds=10**6)
    v = _v_for(v, None)
    g1 = 1 - v / 2
    return g1**n, g1


def beta_bound(beh: Behavior) -> Scalar:
    """sum over (a,b,x,y) of prod_i beta(a_i,b_i,x_i,y_i) P(a,b|x,y).

    beta is 1/8 on entries where a_i xor b_i = x_i and y_i and 5/8 otherwise.
    Upper-bounds the fully no-signaling guessing probability.
    """
    n = beh.n
    exact = beh.mode is Mode.EXACT
    lo, hi = (Fraction(1, 8), Fraction(5, 8)) if exact else (0.125, 0.625)
    single = np.empty(16, dtype=object if exact else float)
    for k in range(16):
        a, b, x, y = k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1
        single[k] = lo if a ^ b == x & y else hi
    weights = single.reshape(2, 2, 2, 2)
    w = weights
    for _ in range(n - 1):
        w = np.multiply.outer(w, weights)
    order = [4 * r + var for var in range(4) for r in range(n)]
    w = np.ascontiguousarray(w.transpose(order)).reshape(-1)
    return (w * beh.entries).sum()


def beta_bound_product(factors: Sequence[Behavior]) -> Scalar:
    """beta_bound of the product of ``factors``, without building the product.

    The weight is a product over rounds, so the sum factorizes into the
    product of the factors' own beta_bound values.
    """
    out = 1
    for f in factors:
        out = out * beta_bound(f)
    return out


def _real_root(coeffs) -> float:
    roots = [r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-12 and 0 <= r.real <= 1]
    if len(roots) != 1:
        raise ArithmeticError(f"expected one root in [0,1] for {coeffs}")
    # polish with a few Newton steps
    x = roots[0]
    p = np.poly1d(coeffs)
    dp = p.deriv()
    for _ in range(5):
        x -= p(x) / dp(x)
    return float(x)


V1 = _real_root([1, -3, -13, 3])
V2 = _real_root([1, 5, 3, -5])


@dataclass(frozen=True)
class AnalyticPiece:
    """Polynomial G(v) = sum_k coeffs[k] v^k valid on [lower, upper]."""

    scenario: ScenarioKind
    n: int
    lower: float
    upper: float
    lower_label: str
    upper_label: str
    coeffs: tuple

    def __call__(self, v):
        return sum(c * v**k for k, c in enumerate(self.coeffs))

    def contains(self, v, margin: float = 0.0) -> bool:
        return self.lower + margin <= float(v) <= self.upper - margin


def _lin(*cs):
    return tuple(Fraction(c) for c in cs)


def analytic_pieces(n: int, scenario) -> list[AnalyticPiece]:
    """Closed-form guessing probabilities for n <= 3, as ordered polynomial pieces."""
    scenario = ScenarioKind.coerce(scenario)
    if n not in (1, 2, 3):
        raise ValueError("closed forms are only known for n in {1, 2, 3}")
    S = scenario
    if n == 1:
        return [AnalyticPiece(S, 1, 0.0, 1.0, "0", "1", _lin(1, Fraction(-1, 2)))]
    if S is ScenarioKind.FULLNS:
        coeffs = [Fraction(math.comb(n, k)) * Fraction(-1, 2) ** k for k in range(n + 1)]
        return [AnalyticPiece(S, n, 0.0, 1.0, "0", "1", tuple(coeffs))]
    if n == 2:
        if S is ScenarioKind.ABNS:
            return [
                AnalyticPiece(S, 2, 0.0, SQRT2_MINUS_1, "0", "sqrt(2)-1", _lin(1, Fraction(-1, 2))),
                AnalyticPiece(S, 2, SQRT2_MINUS_1, 1.0, "sqrt(2)-1", "1",
                              _lin(Fraction(9, 8), Fraction(-3, 4), Fraction(-1, 8))),
            ]
        return [AnalyticPiece(S, 2, 0.0, 1.0, "0", "1", _lin(1, Fraction(-3, 4)))]
    if S is ScenarioKind.ABNS:
        return [
            AnalyticPiece(S, 3, 0.0, V1, "0", "v1", _lin(1, Fraction(-1, 2))),
            AnalyticPiece(S, 3, V1, V2, "v1", "v2",
                          _lin(Fraction(67, 64), Fraction(-45, 64), Fraction(-3, 64), Fraction(1, 64))),
            AnalyticPiece(S, 3, V2, 1.0, "v2", "1",
                          _lin(Fraction(41, 32), Fraction(-27, 32), Fraction(-9, 32), Fraction(-1, 32))),
        ]
    return [
        AnalyticPiece(S, 3, 0.0, SQRT5_MINUS_2, "0", "sqrt(5)-2",
                      _lin(1, Fraction(-29, 32), Fraction(1, 8), Fraction(1, 32))),
        AnalyticPiece(S, 3, SQRT5_MINUS_2, 1.0, "sqrt(5)-2", "1", _lin(1, Fraction(-7, 8))),
    ]


def _piece_for(n, scenario, v) -> AnalyticPiece:
    pieces = analytic_pieces(n, scenario)
    fv = float(v)
    if not 0 <= fv <= 1:
        raise ValueError(f"v={v} outside [0, 1]")
    for piece in pieces:
        if piece.lower <= fv <= piece.upper:
            return piece
    return pieces[-1]


def analytic_reference(n: int, scenario, v: float) -> float:
    """Closed-form G_n(v) evaluated in binary64 (n <= 3)."""
    piece = _piece_for(n, scenario, v)
    return float(piece(float(v)))


def analytic_reference_exact(n: int, scenario, v) -> Fraction:
    """Closed-form G_n(v) at a rational v, exact.

    The piece is selected by comparing v against float thresholds, so v must
    not lie within 1e-12 of an irrational breakpoint.
    """
    v = Fraction(v)
    piece = _piece_for(n, scenario, v)
    for edge, label in ((piece.lower, piece.lower_label), (piece.upper, piece.upper_label)):
        if not label.replace("/", "").isdigit() and abs(float(v) - edge) < 1e-12:
            raise ValueError(f"v={v} is too close to the irrational breakpoint {label}")
    return piece(v)


# ---------------------------------------------------------------------------
# solving


@dataclass
class GuessingResult:
    n: int
    scenario: ScenarioKind
    v: Scalar
    G: Scalar
    H: float
    mode: Mode
    lower_bound: Scalar
    upper_bound: Scalar
    formulation: str = "reduced"
    x_star: int = 0
    y_star: int = 0
    problem: LpProblem | None = field(default=None, repr=False)
    solution: LpSolution | None = field(default=None, repr=False)

    @property
    def H_per_round(self) -> float:
        return self.H / self.n

    def within_bounds(self, tol: float = 0.0) -> bool:
        if self.mode is Mode.EXACT and tol == 0.0:
            return self.lower_bound <= self.G <= self.upper_bound
        return float(self.lower_bound) - tol <= float(self.G) <= float(self.upper_bound) + tol

    def certificate(self):
        from .certify import certificate_from_solution

        return certificate_from_solution(self)

    def as_row(self) -> dict:
        return {
            "scenario": self.scenario.value,
            "n": self.n,
            "v": format_scalar(self.v),
            "G": format_scalar(self.G),
            "H": repr(self.H),
            "H_per_round": repr(self.H_per_round),
            "mode": self.mode.value,
            "lower_bound": format_scalar(self.lower_bound),
            "upper_bound": format_scalar(self.upper_bound),
        }


def default_mode(n: int) -> Mode:
    return Mode.EXACT if n <= 3 else Mode.FLOAT


def min_entropy(G) -> float:
    # + 0.0 turns -0.0 (at G = 1) into 0.0
    return -math.log2(float(G)) + 0.0


def guessing_probability(
    n: int,
    scenario,
    v,
    mode: Mode | str | None = None,
    *,
    formulation: str = "reduced",
    x_star=0,
    y_star=0,
    backend: str = "auto",
) -> GuessingResult:
    """Solve for G_n(v) and attach the LP solution for certification."""
    n = check_rounds(n)
    scenario = ScenarioKind.coerce(scenario)
    mode = default_mode(n) if mode is None else Mode.coerce(mode)
    v = _v_for(v, mode)
    if formulation == "reduced":
        if check_bits(x_star, n, "x*") or check_bits(y_star, n, "y*"):
            raise ValueError("the reduced formulation fixes x* = y* = 0")
        prob = assemble_reduced(n, scenario, v, mode)
    elif formulation == "full":
        prob = assemble_full(n, scenario, v, x_star, y_star, mode)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    sol = solve(prob, backend=backend)
    if sol.status is not LpStatus.OPTIMAL:
        raise LpError(f"guessing LP ended with status {sol.status.value}")
    lo, hi = trivial_bounds(n, v)
    G = sol.objective
    return GuessingResult(
        n=n, scenario=scenario, v=v, G=G, H=min_entropy(G), mode=mode,
        lower_bound=lo, upper_bound=hi, formulation=formulation,
        x_star=check_bits(x_star, n), y_star=check_bits(y_star, n), problem=prob, solution=sol,
    )


@functools.lru_cache(maxsize=256)
def cached_guessing_probability(n, scenario, v, mode=None, formulation="reduced", x_star=0, y_star=0):
    return guessing_probability(n, scenario, v, mode, formulation=formulation, x_star=x_star, y_star=y_star)


def entropy_rates(scenario, v_grid: Iterable, k_max: int = 3, mode: Mode | str | None = None) -> list[dict]:
    """Rows ``{"v", "rates": [H_k/k for k = 1..k_max]}`` with H_k = -log2 G_k.

    Raises ArithmeticError if some H_k/k exceeds H_1 (beyond 1e-12).
    """
    scenario = ScenarioKind.coerce(scenario)
    k_max = check_rounds(k_max)
    out = []
    for v in v_grid:
        rates = []
        for k in range(1, k_max + 1):
            md = Mode.coerce(mode) if mode is not None else default_mode(k)
            vk = to_mode(v, md) if not (md is Mode.EXACT and isinstance(v, float)) else v
            if md is Mode.EXACT and isinstance(vk, float):
                md = Mode.FLOAT
            G = cached_guessing_probability(k, scenario, vk, md).G
            rates.append(min_entropy(G) / k)
        if any(r > rates[0] + 1e-12 for r in rates):
            raise ArithmeticError(f"rate above the single-round min-entropy at v={v}: {rates}")
        out.append({"v": v, "rates": rates})
    return out
