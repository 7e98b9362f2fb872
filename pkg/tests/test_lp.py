from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from prguess.lp import LpError, LpProblem, LpStatus, extract_dual, solve, solve_highs
from prguess.nosig import RowLabel, _build
from prguess.numeric import Mode

F = Fraction


def make_problem(A, b, c, mode=Mode.EXACT):
    A = np.asarray(A, dtype=np.int64)
    cols = [np.flatnonzero(row) for row in A]
    coefs = [row[np.flatnonzero(row)] for row in A]
    conv = (lambda t: F(t)) if mode is Mode.EXACT else float
    labels = [RowLabel("test", 0, r, 0) for r in range(len(A))]
    system = _build(A.shape[1], cols, coefs, [conv(t) for t in b], labels, mode)
    return LpProblem(system, {j: conv(cj) for j, cj in enumerate(c) if cj}, mode)


def assert_optimal_exact(prob, sol):
    """Independent optimality check: primal and dual feasibility plus zero gap."""
    A = prob.system.to_csr(dtype=np.int64).toarray().astype(object)
    p = sol.primal_vector(prob.num_vars)
    y = np.array(sol.dual, dtype=object)
    c = np.array([prob.objective.get(j, F(0)) for j in range(prob.num_vars)], dtype=object)
    assert all(v >= 0 for v in p)
    assert list(A.dot(p)) == list(prob.system.rhs)
    assert all(s >= 0 for s in A.T.dot(y) - c)
    assert c.dot(p) == sol.objective == np.array(prob.system.rhs, dtype=object).dot(y)


def beale():
    # Beale's cycling example in equality form, rows scaled to integers; optimum 5/4
    A = [[1, -32, -4, 36, 4, 0, 0],
         [1, -24, -1, 6, 0, 2, 0],
         [0, 0, 1, 0, 0, 0, 1]]
    c = [F(3, 4), -20, F(1, 2), -6, 0, 0, 0]
    return A, [0, 0, 1], c


def test_beale_does_not_cycle():
    A, b, c = beale()
    prob = make_problem(A, b, c)
    sol = solve(prob, backend="simplex")
    assert sol.status is LpStatus.OPTIMAL and sol.objective == F(5, 4)
    assert_optimal_exact(prob, sol)
    fsol = solve(make_problem(A, b, c, Mode.FLOAT), backend="simplex")
    assert abs(fsol.objective - 1.25) < 1e-12


def test_infeasible():
    prob = make_problem([[1, 1], [1, 1]], [1, 2], [1, 0])
    sol = solve(prob, backend="simplex")
    assert sol.status is LpStatus.INFEASIBLE and sol.phase1_value > 0


def test_unbounded_with_ray():
    prob = make_problem([[1, -1, 0], [0, 0, 1]], [0, 1], [1, 0, 0])
    sol = solve(prob, backend="simplex")
    assert sol.status is LpStatus.UNBOUNDED
    ray = sol.ray
    A = np.array([[1, -1, 0], [0, 0, 1]])
    d = np.array([ray.get(j, 0) for j in range(3)], dtype=object)
    assert list(A.dot(d)) == [0, 0] and all(v >= 0 for v in d) and d[0] > 0


def test_redundant_and_zero_rows():
    A = [[1, 1, 0], [2, 2, 0], [0, 0, 0], [0, 1, 1]]
    prob = make_problem(A, [2, 4, 0, 3], [1, 2, 1])
    sol = solve(prob, backend="simplex")
    assert sol.status is LpStatus.OPTIMAL and sol.objective == 5
    assert_optimal_exact(prob, sol)


def test_negative_rhs_rows():
    prob = make_problem([[-1, -1, 0], [1, 0, -1]], [-3, 1], [1, 2, 0])
    sol = solve(prob, backend="simplex")
    assert sol.objective == 5  # x1 = 1, x2 = 2
    assert_optimal_exact(prob, sol)


def test_pivot_limit():
    A, b, c = beale()
    with pytest.raises(LpError):
        solve(make_problem(A, b, c), backend="simplex", max_pivots=1)


def test_highs_rejects_exact():
    A, b, c = beale()
    with pytest.raises(ValueError):
        solve(make_problem(A, b, c), backend="highs")


def random_lp(seed, m, n):
    rng = np.random.default_rng(seed)
    A = rng.integers(-3, 4, (m, n))
    x0 = rng.integers(0, 3, n)
    b = A @ x0
    c = rng.integers(-5, 6, n)
    return A, b, c


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(2, 8))
def test_random_against_scipy(seed, m, n):
    A, b, c = random_lp(seed, m, n)
    ref = linprog(-c, A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs")
    prob = make_problem(A, b, c)
    sol = solve(prob, backend="simplex")
    if ref.status == 3:
        assert sol.status is LpStatus.UNBOUNDED
        return
    assert ref.status == 0
    assert sol.status is LpStatus.OPTIMAL
    assert abs(float(sol.objective) + ref.fun) < 1e-7
    assert_optimal_exact(prob, sol)
    fsol = solve(make_problem(A, b, c, Mode.FLOAT), backend="simplex")
    assert abs(fsol.objective + ref.fun) < 1e-7


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_warm_start_matches_cold(seed):
    A, b, c = random_lp(seed, 6, 12)
    prob = make_problem(A, b, c)
    cold = solve(prob, backend="simplex")
    warm = solve(prob, backend="warm")
    assert cold.status is warm.status
    if cold.status is LpStatus.OPTIMAL:
        assert cold.objective == warm.objective
        assert_optimal_exact(prob, warm)


def test_highs_dual_convention():
    A, b, c = random_lp(3, 5, 10)
    fprob = make_problem(A, b, c, Mode.FLOAT)
    sol = solve_highs(fprob)
    if sol.status is not LpStatus.OPTIMAL:
        pytest.skip("random instance is not bounded")
    y = np.array(sol.dual)
    assert abs(b @ y - sol.objective) < 1e-8
    assert np.all(A.T @ y - c >= -1e-8)


def test_extract_dual_reproduces_solver_dual():
    A, b, c = beale()
    prob = make_problem(A, b, c)
    sol = solve(prob, backend="simplex")
    assert extract_dual(sol, prob) == sol.dual


def test_bad_warm_basis_falls_back():
    A, b, c = beale()
    prob = make_problem(A, b, c)
    sol = solve(prob, backend="warm", warm_basis=[0, 1, 2])
    assert sol.objective == F(5, 4)
