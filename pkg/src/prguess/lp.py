"""Two-phase revised simplex for ``max c^T p  s.t.  A p = b, p >= 0``.

Two arithmetic engines share one driver:

* exact: GMP rationals, basis inverse kept in product form (one eta column per
  pivot, periodically refactored by re-pivoting the basic columns into an
  identity);
* float: binary64, basis factorized with a partially pivoted sparse LU
  (SuperLU) each iteration.

Every row carries an artificial column.  Artificials left basic after phase 1
sit on redundant rows at value zero and are treated as fixed at zero in
phase 2, so the row/dual correspondence is never disturbed.

Pricing is Dantzig's largest-reduced-cost rule until ``3 * rows`` pivots have
been made in a phase, then Bland's smallest-index rule, which cannot cycle.

For large instances the exact engine can be warm-started from the basis of a
floating-point HiGHS solve; the basis is then re-factorized exactly, and the
exact simplex continues from it until exact optimality is proven.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import gmpy2
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .nosig import ConstraintSystem
from .numeric import Mode, Scalar

log = logging.getLogger(__name__)

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
# Above this many matrix nonzeros the exact engine warm-starts from HiGHS by default.
WARM_START_NNZ = 400


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpError(RuntimeError):
    pass


@dataclass
class LpProblem:
    """Standard-form LP over the variables of a constraint system (maximization)."""

    system: ConstraintSystem
    objective: Mapping[int, Scalar]
    mode: Mode = Mode.EXACT

    def __post_init__(self):
        self.mode = Mode.coerce(self.mode)
        for j in self.objective:
            if not 0 <= j < self.system.num_vars:
                raise ValueError(f"objective index {j} out of range")

    @property
    def num_vars(self) -> int:
        return self.system.num_vars

    @property
    def num_rows(self) -> int:
        return self.system.num_rows

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.num_vars, dtype=float)
        for j, v in self.objective.items():
            c[j] = float(v)
        return c

    def to_dict(self) -> dict:
        from .numeric import format_scalar

        out = self.system.to_dict()
        out["objective"] = [[int(j), format_scalar(v)] for j, v in sorted(self.objective.items())]
        out["sense"] = "max"
        return out


@dataclass
class LpSolution:
    status: LpStatus
    mode: Mode
    primal: dict = field(default_factory=dict)
    dual: list | None = None
    objective: Scalar | None = None
    basis: list = field(default_factory=list)
    pivots: int = 0
    backend: str = "simplex"
    phase1_value: Scalar | None = None
    ray: dict | None = None

    def primal_vector(self, num_vars: int) -> np.ndarray:
        if self.mode is Mode.EXACT:
            p = np.empty(num_vars, dtype=object)
            p[:] = Fraction(0)
        else:
            p = np.zeros(num_vars)
        for j, v in self.primal.items():
            p[j] = v
        return p


# ---------------------------------------------------------------------------
# exact linear algebra


class _EtaFile:
    """Product-form inverse ``B^-1 = E_k ... E_1`` over exact rationals."""

    def __init__(self, m: int):
        self.m = m
        self.etas: list[tuple[int, Fraction, list]] = []
        self.nnz = 0

    def ftran(self, vec: Mapping[int, Fraction]) -> dict:
        x = dict(vec)
        for r, piv, items in self.etas:
            xr = x.get(r)
            if not xr:
                continue
            xr = xr / piv
            x[r] = xr
            for i, di in items:
                val = x.get(i, 0) - di * xr
                if val:
                    x[i] = val
                else:
                    x.pop(i, None)
        return x

    def btran(self, cost: Sequence) -> list:
        y = list(cost)
        for r, piv, items in reversed(self.etas):
            s = y[r]
            for i, di in items:
                yi = y[i]
                if yi:
                    s -= di * yi
            y[r] = s / piv if s else s
        return y

    def push(self, r: int, d: Mapping[int, Fraction]):
        items = [(i, v) for i, v in d.items() if i != r]
        self.etas.append((r, d[r], items))
        self.nnz += len(items) + 1


_Q = gmpy2.mpq


def _to_q(v) -> gmpy2.mpq:
    v = Fraction(v)
    return _Q(int(v.numerator), int(v.denominator))


def _to_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    return Fraction(int(q.numerator), int(q.denominator))


def _lcm_denominators(values) -> int:
    den = 1
    for v in values:
        if v:
            q = v.denominator
            if den % q:
                den = den * q // math.gcd(den, q)
    return den


def _refined_solve(lu, rhs: list, apply, trans: str, steps: int = 12):
    """Exact solution of a nonsingular system from its float LU, or None.

    Residuals are computed exactly, so each refinement step gains roughly
    the precision of one float solve.  After each step the iterate is also
    rounded to the nearest fractions with a denominator bound matched to
    that precision, and the rounding is accepted if it solves the system.
    """
    x = [_Q(0)] * len(rhs)
    res = list(rhs)
    for k in range(steps):
        if not any(res):
            return x
        dx = lu.solve(np.array([float(v) for v in res]), trans=trans)
        if not np.all(np.isfinite(dx)):
            return None
        x = [xi + _Q(float(d)) if d else xi for xi, d in zip(x, dx)]
        res = [b - a for b, a in zip(rhs, apply(x))]
        if k and any(res):
            max_den = 10 ** (5 * k)
            xr = [_to_q(_to_fraction(v).limit_denominator(max_den)) for v in x]
            if all(b == a for b, a in zip(rhs, apply(xr))):
                return xr
    return x if not any(res) else None


# ---------------------------------------------------------------------------
# driver


class _Simplex:
    def __init__(self, prob: LpProblem, max_pivots: int | None = None, refactor_every: int = 100):
        self.prob = prob
        self.exact = prob.mode is Mode.EXACT
        sys_ = prob.system
        self.m, self.n = sys_.num_rows, sys_.num_vars
        rhs = list(sys_.rhs)
        # rows with negative right-hand side are negated so the artificial basis is feasible
        self.sign = [(-1 if b < 0 else 1) for b in rhs]
        sign_arr = np.asarray(self.sign, dtype=np.int64)
        row_of_entry = np.repeat(np.arange(self.m), np.diff(sys_.indptr))
        data = sys_.data * sign_arr[row_of_entry]
        csr = sp.csr_matrix((data, sys_.indices, sys_.indptr), shape=(self.m, self.n))
        csc = csr.tocsc()
        csc.sort_indices()
        self.csc = csc
        self.col_rows = [csc.indices[csc.indptr[j]:csc.indptr[j + 1]].tolist() for j in range(self.n)]
        self.col_vals = [csc.data[csc.indptr[j]:csc.indptr[j + 1]].tolist() for j in range(self.n)]
        self.row_nnz = np.diff(csr.indptr).tolist()
        if self.exact:
            self.b = [_to_q(abs(v)) for v in rhs]
            self.c = {j: _to_q(v) for j, v in prob.objective.items()}
        else:
            self.b = [abs(float(v)) for v in rhs]
            self.c = {j: float(v) for j, v in prob.objective.items()}
            self.A_float = csc.astype(float)
            # [A | I] so that a basis is a single column selection
            self.AI_float = sp.hstack([self.A_float, sp.identity(self.m, format="csc")], format="csc")
            self.AT_float = csr.astype(float)
        self.max_pivots = max_pivots
        self.refactor_every = refactor_every
        self.pivots = 0
        self.head = [self.n + r for r in range(self.m)]
        self.is_basic = np.zeros(self.n + self.m, dtype=bool)
        self.is_basic[self.n:] = True
        self.eta = _EtaFile(self.m) if self.exact else None
        self.lu = None
        self.x = list(self.b)
        self.phase = 1
        self.unit = _Q(1) if self.exact else 1.0

    # -- linear algebra ---------------------------------------------------

    def column(self, j: int) -> dict:
        if j >= self.n:
            return {j - self.n: self.unit}
        if self.exact:
            return {i: _Q(a) for i, a in zip(self.col_rows[j], self.col_vals[j])}
        return dict(zip(self.col_rows[j], self.col_vals[j]))

    def ftran(self, j: int) -> dict:
        if self.exact:
            return self.eta.ftran(self.column(j))
        dense = np.zeros(self.m)
        for i, v in self.column(j).items():
            dense[i] = v
        sol = self.lu.solve(dense)
        return {i: float(sol[i]) for i in np.flatnonzero(np.abs(sol) > 1e-13)}

    def btran(self, cost_b: list) -> list:
        if self.exact:
            return self.eta.btran(cost_b)
        return self.lu.solve(np.asarray(cost_b, dtype=float), trans="T").tolist()

    def basis_matrix(self) -> sp.csc_matrix:
        return self.AI_float[:, self.head]

    def factor_float(self):
        try:
            self.lu = spla.splu(self.basis_matrix(), permc_spec="COLAMD")
        except RuntimeError as exc:  # singular basis
            raise LpError(f"singular basis in float simplex: {exc}") from exc
        sol = self.lu.solve(np.asarray(self.b, dtype=float))
        self.x = sol.tolist()

    def refactor(self, structural: Sequence[int] | None = None, reserved: set | None = None):
        """Rebuild the exact eta file for the given basic structural columns.

        Columns are pivoted into an identity (all-artificial) basis one at a
        time, sparsest first, each on the free slot with the fewest original
        row nonzeros.  Columns that turn out dependent are skipped.
        """
        if structural is None:
            structural = [j for j in self.head if j < self.n]
            # an artificial only ever occupies its own row slot
            reserved = {j - self.n for j in self.head if j >= self.n}
        reserved = reserved or set()
        eta = _EtaFile(self.m)
        head = [self.n + r for r in range(self.m)]
        taken = set(reserved)
        for q in sorted(structural, key=lambda j: (len(self.col_rows[j]), j)):
            d = eta.ftran(self.column(q))
            best = None
            for i, v in d.items():
                if i in taken or not v:
                    continue
                key = (self.row_nnz[i], i)
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                continue
            r = best[1]
            eta.push(r, d)
            head[r] = q
            taken.add(r)
        self.eta = eta
        self.head = head
        self.is_basic[:] = False
        for j in head:
            self.is_basic[j] = True
        self.x = [_Q(0)] * self.m
        for i, v in eta.ftran({r: bv for r, bv in enumerate(self.b) if bv}).items():
            self.x[i] = v

    # -- pricing ----------------------------------------------------------

    def reduced_costs_positive(self, cost: dict, y: list, allow_art: bool) -> list:
        """Nonbasic columns with positive reduced cost, as (j, scaled d_j)."""
        out = []
        if self.exact:
            den = _lcm_denominators(list(y) + list(cost.values()))
            Y = [int(v * den) for v in y]
            for j in range(self.n):
                if self.is_basic[j]:
                    continue
                s = 0
                for i, a in zip(self.col_rows[j], self.col_vals[j]):
                    yi = Y[i]
                    if yi:
                        s += a * yi
                cj = cost.get(j)
                dj = (int(cj * den) if cj else 0) - s
                if dj > 0:
                    out.append((j, _Q(dj, den)))
            if allow_art:
                for r in range(self.m):
                    j = self.n + r
                    if not self.is_basic[j]:
                        cj = cost.get(j, 0)
                        dj = cj - y[r]
                        if dj > 0:
                            out.append((j, dj))
            return out
        ya = np.asarray(y, dtype=float)
        d = -(self.AT_float.T @ ya)
        for j, v in cost.items():
            if j < self.n:
                d[j] += v
        d[self.is_basic[: self.n]] = -np.inf
        cand = np.flatnonzero(d > OPT_TOL)
        out = [(int(j), float(d[j])) for j in cand]
        if allow_art:
            for r in range(self.m):
                j = self.n + r
                if not self.is_basic[j]:
                    dj = cost.get(j, 0.0) - ya[r]
                    if dj > OPT_TOL:
                        out.append((j, dj))
        return out

    # -- main loop --------------------------------------------------------

    def run_phase(self, cost: dict, phase: int) -> LpStatus:
        self.phase = phase
        pivots_here = 0
        bland_after = 3 * self.m
        since_refactor = 0
        while True:
            if not self.exact:
                self.factor_float()
            cost_b = [cost.get(j, 0) for j in self.head]
            if self.exact:
                cost_b = [_Q(v) for v in cost_b]
            y = self.btran(cost_b)
            cands = self.reduced_costs_positive(cost, y, allow_art=False)
            if not cands:
                return LpStatus.OPTIMAL
            if pivots_here >= bland_after:
                q = min(cands)[0]
            else:
                q = max(cands, key=lambda t: (t[1], -t[0]))[0]
            d = self.ftran(q)
            r = self.ratio_test(d, phase)
            if r is None:
                self.ray_column, self.ray_d = q, d
                return LpStatus.UNBOUNDED
            self.pivot(r, q, d)
            pivots_here += 1
            since_refactor += 1
            if self.max_pivots is not None and self.pivots >= self.max_pivots:
                raise LpError(f"pivot limit {self.max_pivots} reached")
            if self.exact and since_refactor >= self.refactor_every:
                self.refactor()
                since_refactor = 0

    def ratio_test(self, d: dict, phase: int) -> int | None:
        best = None
        tol = 0 if self.exact else PIVOT_TOL
        for r, dr in d.items():
            j = self.head[r]
            if phase == 2 and j >= self.n:
                if abs(dr) > tol:
                    key = (0, j)
                else:
                    continue
            elif dr > tol:
                xr = self.x[r]
                if not self.exact and xr < 0:
                    xr = 0.0
                key = (xr / dr, j)
            else:
                continue
            if best is None or key < best[0]:
                best = (key, r)
        return None if best is None else best[1]

    def pivot(self, r: int, q: int, d: dict):
        if self.head[r] >= self.n and self.phase == 2:
            # artificial fixed at zero leaves with a degenerate step
            theta = _Q(0) if self.exact else 0.0
        else:
            theta = self.x[r] / d[r]
        if theta:
            for i, di in d.items():
                self.x[i] = self.x[i] - theta * di
        self.x[r] = theta
        old = self.head[r]
        self.is_basic[old] = False
        self.is_basic[q] = True
        self.head[r] = q
        if self.exact:
            self.eta.push(r, d)
        self.pivots += 1

    def objective_value(self, cost: dict):
        total = _Q(0) if self.exact else 0.0
        for r, j in enumerate(self.head):
            cj = cost.get(j)
            if cj:
                total += cj * self.x[r]
        return total

    def solve(self, warm_basis: Sequence[int] | None = None) -> LpSolution:
        zero = _Q(0) if self.exact else 0.0
        if warm_basis is not None and self.exact:
            y = self._certify_basis(warm_basis)
            if y is not None:
                return self._optimal(y, zero, "simplex+warm")
        started_warm = False
        if warm_basis is not None:
            started_warm = self._try_warm_start(warm_basis)
        phase1_value = zero
        if not started_warm:
            art_cost = {self.n + r: -1 for r in range(self.m)}
            if self.exact:
                art_cost = {k: _Q(v) for k, v in art_cost.items()}
            status = self.run_phase(art_cost, 1)
            if not self.exact:
                self.factor_float()
            phase1_value = -self.objective_value(art_cost)
            tol = 0 if self.exact else FEAS_TOL * max(1, self.m)
            if phase1_value > tol:
                y = self.btran([art_cost.get(j, zero) for j in self.head])
                return LpSolution(
                    LpStatus.INFEASIBLE, self.prob.mode, dual=self._unsign(y),
                    basis=list(self.head), pivots=self.pivots, phase1_value=self.export(phase1_value),
                )
            if self.exact:
                self.phase = 2
                self.refactor()
        status = self.run_phase(self.c, 2)
        if not self.exact:
            self.factor_float()
        if status is LpStatus.UNBOUNDED:
            ray = {self.ray_column: (_Q(1) if self.exact else 1.0)}
            for i, di in self.ray_d.items():
                j = self.head[i]
                if j < self.n:
                    ray[j] = -di
            ray = {j: self.export(v) for j, v in ray.items()}
            return LpSolution(LpStatus.UNBOUNDED, self.prob.mode, basis=list(self.head),
                              pivots=self.pivots, ray=ray, phase1_value=self.export(phase1_value))
        cost_b = [self.c.get(j, zero) for j in self.head]
        y = self.btran(cost_b)
        return self._optimal(y, phase1_value, "simplex+warm" if started_warm else "simplex")

    def _optimal(self, y: list, phase1_value, backend: str) -> LpSolution:
        zero = _Q(0) if self.exact else 0.0
        primal = {}
        for r, j in enumerate(self.head):
            if j < self.n and self.x[r]:
                val = self.x[r]
                if not self.exact and abs(val) < 1e-15:
                    continue
                primal[j] = val
        obj = sum((self.c[j] * v for j, v in primal.items() if j in self.c), zero)
        return LpSolution(
            LpStatus.OPTIMAL, self.prob.mode, primal={j: self.export(v) for j, v in primal.items()},
            dual=self._unsign(y), objective=self.export(obj),
            basis=list(self.head), pivots=self.pivots, phase1_value=self.export(phase1_value),
            backend=backend,
        )

    def _unsign(self, y: list) -> list:
        return [self.export(-v if s < 0 else v) for v, s in zip(y, self.sign)]

    def export(self, v):
        return _to_fraction(v) if self.exact else float(v)

    def _certify_basis(self, warm_basis: Sequence[int]) -> list | None:
        """Exact x_B and y for a candidate basis without an exact factorization.

        Both systems are solved in float with exact-residual refinement and
        rounded to nearby rationals; the result is accepted only if it solves
        B x = b and B^T y = c_B exactly, is primal feasible and has no
        positive reduced cost.  Returns y, having installed the basis, or
        None.
        """
        basic_rows = sorted({j - self.n for j in warm_basis if self.n <= j < self.n + self.m})
        structural = [j for j in warm_basis if 0 <= j < self.n]
        reserved = set(basic_rows)
        free = [r for r in range(self.m) if r not in reserved]
        if len(free) != len(structural):
            return None
        head = [self.n + r for r in range(self.m)]
        for r, q in zip(free, structural):
            head[r] = q
        cols = [self.column(j) for j in head]
        bmat = sp.csc_matrix(
            ([float(v) for c in cols for v in c.values()],
             ([i for c in cols for i in c], [k for k, c in enumerate(cols) for _ in c])),
            shape=(self.m, self.m),
        )
        try:
            lu = spla.splu(bmat, permc_spec="COLAMD")
        except RuntimeError:
            return None

        def b_times(x):
            out = [_Q(0)] * self.m
            for k, c in enumerate(cols):
                if x[k]:
                    for i, a in c.items():
                        out[i] += a * x[k]
            return out

        def bt_times(y):
            return [sum((a * y[i] for i, a in c.items() if y[i]), _Q(0)) for c in cols]

        x = _refined_solve(lu, self.b, b_times, "N")
        if x is None:
            return None
        if any(v < 0 for v in x) or any(x[r] for r in basic_rows):
            return None
        y = _refined_solve(lu, [self.c.get(j, _Q(0)) for j in head], bt_times, "T")
        if y is None:
            return None
        self.head = head
        self.is_basic[:] = False
        self.is_basic[head] = True
        self.x = x
        self.phase = 2
        if self.reduced_costs_positive(self.c, y, allow_art=False):
            return None
        return y

    def _try_warm_start(self, warm_basis: Sequence[int]) -> bool:
        structural = [j for j in warm_basis if 0 <= j < self.n]
        basic_rows = {j - self.n for j in warm_basis if self.n <= j < self.n + self.m}
        if not self.exact:
            self.head = [self.n + r for r in range(self.m)]
            return False
        self.phase = 2
        self.refactor(structural, reserved=basic_rows)
        tol = 0
        for r, j in enumerate(self.head):
            v = self.x[r]
            if v < tol or (j >= self.n and v != 0):
                log.info("warm basis is not primal feasible in exact arithmetic; cold start")
                self.phase = 1
                self.eta = _EtaFile(self.m)
                self.head = [self.n + r for r in range(self.m)]
                self.is_basic[:] = False
                self.is_basic[self.n:] = True
                self.x = list(self.b)
                return False
        return True


# ---------------------------------------------------------------------------
# HiGHS backend (float)


def solve_highs(prob: LpProblem, method: str = "ipm") -> LpSolution:
    """Solve in binary64 with HiGHS; returns primal, duals and the final basis.

    The default interior point method with crossover is much faster than
    dual simplex on these highly degenerate programs; simplex is retried
    when crossover leaves no valid basis.
    """
    import highspy

    sys_ = prob.system
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("threads", 1)
    h.setOptionValue("solver", method)
    if method == "ipm":
        h.setOptionValue("run_crossover", "on")
    lp = highspy.HighsLp()
    lp.num_col_ = sys_.num_vars
    lp.num_row_ = sys_.num_rows
    lp.col_cost_ = prob.objective_vector()
    lp.col_lower_ = np.zeros(sys_.num_vars)
    lp.col_upper_ = np.full(sys_.num_vars, highspy.kHighsInf)
    rhs = np.array([float(b) for b in sys_.rhs])
    lp.row_lower_ = rhs
    lp.row_upper_ = rhs
    lp.sense_ = highspy.ObjSense.kMaximize
    lp.a_matrix_.format_ = highspy.MatrixFormat.kRowwise
    lp.a_matrix_.start_ = sys_.indptr.astype(np.int32)
    lp.a_matrix_.index_ = sys_.indices.astype(np.int32)
    lp.a_matrix_.value_ = sys_.data.astype(float)
    h.passModel(lp)
    h.run()
    status = h.getModelStatus()
    if status == highspy.HighsModelStatus.kInfeasible:
        return LpSolution(LpStatus.INFEASIBLE, Mode.FLOAT, backend="highs")
    if status == highspy.HighsModelStatus.kUnbounded:
        return LpSolution(LpStatus.UNBOUNDED, Mode.FLOAT, backend="highs")
    if status != highspy.HighsModelStatus.kOptimal:
        raise LpError(f"HiGHS returned status {h.modelStatusToString(status)}")
    sol = h.getSolution()
    basis = h.getBasis()
    if not basis.valid and method != "simplex":
        return solve_highs(prob, "simplex")
    col_value = np.asarray(sol.col_value)
    primal = {int(j): float(col_value[j]) for j in np.flatnonzero(np.abs(col_value) > 1e-15)}
    # HiGHS row duals are d(objective)/d(rhs), which is exactly y for a maximization
    dual = [float(v) for v in sol.row_dual]
    head = [j for j, st in enumerate(basis.col_status) if st == highspy.HighsBasisStatus.kBasic]
    head += [sys_.num_vars + r for r, st in enumerate(basis.row_status) if st == highspy.HighsBasisStatus.kBasic]
    c = prob.objective_vector()
    obj = float(c @ col_value)
    info = h.getInfo()
    return LpSolution(LpStatus.OPTIMAL, Mode.FLOAT, primal=primal, dual=dual, objective=obj,
                      basis=head, pivots=int(info.simplex_iteration_count), backend="highs")


# ---------------------------------------------------------------------------
# public API


def solve(
    prob: LpProblem,
    *,
    backend: str = "auto",
    warm_basis: Sequence[int] | None = None,
    max_pivots: int | None = None,
) -> LpSolution:
    """Solve ``prob``.

    ``backend``:
      * ``"simplex"``: in-house two-phase simplex in the problem's mode, cold start;
      * ``"highs"``: HiGHS in binary64 (float problems only);
      * ``"warm"``: exact simplex started from the HiGHS basis;
      * ``"auto"``: float problems use the in-house simplex when small and
        HiGHS otherwise; exact problems use a warm start when large.
    """
    nnz = len(prob.system.indices)
    if backend == "auto":
        if prob.mode is Mode.FLOAT:
            backend = "simplex" if nnz <= WARM_START_NNZ else "highs"
        else:
            backend = "warm" if nnz > WARM_START_NNZ else "simplex"
    if backend == "highs":
        if prob.mode is Mode.EXACT:
            raise ValueError("HiGHS cannot produce exact solutions; use backend='warm'")
        return solve_highs(prob)
    if backend == "warm":
        if prob.mode is not Mode.EXACT:
            return solve_highs(prob)
        if warm_basis is None:
            float_prob = LpProblem(prob.system, prob.objective, Mode.FLOAT)
            hsol = solve_highs(float_prob)
            if hsol.status is not LpStatus.OPTIMAL:
                log.info("HiGHS reported %s; confirming with exact cold start", hsol.status.value)
            else:
                warm_basis = hsol.basis
        return _Simplex(prob, max_pivots=max_pivots).solve(warm_basis)
    if backend != "simplex":
        raise ValueError(f"unknown backend {backend!r}")
    return _Simplex(prob, max_pivots=max_pivots).solve(warm_basis)


def extract_dual(sol: LpSolution, prob: LpProblem) -> list:
    """Dual vector y = B^-T c_B recomputed from the optimal basis.

    In exact mode the basis system is re-factorized and solved exactly; in
    float mode with SuperLU.
    """
    if sol.status is not LpStatus.OPTIMAL:
        raise LpError(f"no dual for a solution with status {sol.status.value}")
    s = _Simplex(prob)
    s.phase = 2
    structural = [j for j in sol.basis if j < prob.num_vars]
    artificial = [j - prob.num_vars for j in sol.basis if j >= prob.num_vars]
    if len(structural) + len(artificial) != prob.num_rows:
        raise LpError("basis has the wrong size")
    if s.exact:
        s.refactor(structural, reserved=set(artificial))
        cost_b = [_Q(s.c.get(j, 0)) for j in s.head]
        return s._unsign(s.btran(cost_b))
    s.head = structural + [prob.num_vars + r for r in artificial]
    s.factor_float()
    cost_b = [s.c.get(j, 0.0) for j in s.head]
    return s._unsign(s.btran(cost_b))
