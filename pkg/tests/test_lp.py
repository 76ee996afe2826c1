from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from sprm.errors import DimensionError
from sprm.lp import (EQ, GE, LE, LpProblem, build_chebyshev_lp, chebyshev_fit, solve_least_squares,
                     solve_lp, to_mps)


def vertex_oracle(c, A, b):
    """min c@x s.t. A x <= b, x >= 0 by trying every basis of active constraints."""
    m, n = A.shape
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    subsets = np.array(list(combinations(range(m + n), n)))
    mats, rhs = G[subsets], h[subsets]
    ok = np.abs(np.linalg.det(mats)) > 1e-10
    xs = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(xs @ G.T <= h + 1e-9, axis=1)
    return float(np.min(xs[feas] @ c))


def random_bounded_lp(rng):
    n = int(rng.integers(1, 9))
    m = int(rng.integers(1, 9))
    A = rng.uniform(0.1, 2.0, (m, n)) * (rng.uniform(size=(m, n)) < 0.8)
    A[0] = np.abs(A[0]) + 0.1  # first row bounds every variable
    b = rng.uniform(1.0, 5.0, m)
    c = rng.normal(size=n)
    return c, A, b


def test_examples():
    p = LpProblem.from_dense([1.0], [[1.0]], GE, [3.0])
    sol = solve_lp(p)
    assert sol.optimal and sol.x[0] == pytest.approx(3) and sol.objective == pytest.approx(3)
    p = LpProblem.from_dense([1.0, 1.0], [[1.0, 1.0]], GE, [1.0], [0, 0], [np.inf, np.inf])
    assert solve_lp(p).objective == pytest.approx(1)
    p = LpProblem.from_dense([0.0], [[1.0]], LE, [-1.0], [0.0], [np.inf])
    assert solve_lp(p).status == "infeasible"


def test_unbounded():
    p = LpProblem.from_dense([-1.0], [[1.0]], GE, [0.0])
    assert solve_lp(p).status == "unbounded"


def test_vertex_enumeration_agreement():
    rng = np.random.default_rng(11)
    for _ in range(200):
        c, A, b = random_bounded_lp(rng)
        n = len(c)
        sol = solve_lp(LpProblem.from_dense(c, A, LE, b, np.zeros(n), np.full(n, np.inf)))
        assert sol.optimal
        assert sol.objective == pytest.approx(vertex_oracle(c, A, b), abs=1e-7)
        assert sol.max_violation <= 1e-8


@pytest.mark.parametrize("rule", ["dantzig", "bland"])
def test_mixed_senses_against_scipy(rule):
    rng = np.random.default_rng(5)
    for _ in range(60):
        n, m = int(rng.integers(2, 7)), int(rng.integers(1, 7))
        A = rng.normal(size=(m, n))
        x_feas = rng.uniform(-1, 1, n)
        senses = rng.choice([LE, EQ, GE], m)
        b = A @ x_feas + np.where(senses == LE, 0.5, np.where(senses == GE, -0.5, 0.0))
        lo, hi = np.full(n, -2.0), np.full(n, 2.0)
        c = rng.normal(size=n)
        ours = solve_lp(LpProblem.from_dense(c, A, tuple(senses), b, lo, hi), rule=rule)
        ub = [(A[i], b[i]) if s == LE else (-A[i], -b[i]) for i, s in enumerate(senses) if s != EQ]
        eq = [(A[i], b[i]) for i, s in enumerate(senses) if s == EQ]
        ref = linprog(c, A_ub=np.array([r for r, _ in ub]) if ub else None,
                      b_ub=[v for _, v in ub] if ub else None,
                      A_eq=np.array([r for r, _ in eq]) if eq else None,
                      b_eq=[v for _, v in eq] if eq else None,
                      bounds=list(zip(lo, hi)), method="highs")
        assert ours.optimal and ref.status == 0
        assert ours.objective == pytest.approx(ref.fun, abs=1e-7)


def test_validation():
    with pytest.raises(DimensionError):
        LpProblem([1.0], [0], [1], [1.0], (LE,), [1.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        LpProblem.from_dense([1.0], [[1.0]], LE, [1.0], [2.0], [1.0])


def test_mps_dump(tmp_path):
    p = LpProblem.from_dense([1.0, 2.0], [[1.0, 1.0]], GE, [1.0], [0, 0], [np.inf, 4.0])
    text = to_mps(p)
    assert text.startswith("NAME") and "RHS" in text and text.rstrip().endswith("ENDATA")
    path = tmp_path / "p.mps"
    solve_lp(p, mps_dump=str(path))
    assert path.read_text() == text


def test_chebyshev_examples():
    c, g = chebyshev_fit(np.ones((2, 1)), [0.0, 1.0])
    assert g == pytest.approx(0.5) and c[0] == pytest.approx(0.5)
    x = np.arange(5.0)
    _, g = chebyshev_fit(np.column_stack([np.ones(5), x]), 3 * x - 1)
    assert g == pytest.approx(0.0, abs=1e-9)
    _, g = chebyshev_fit(np.ones((3, 1)), [0.0, 1.0, 10.0], keep=[0, 1])
    assert g == pytest.approx(0.5)
    with pytest.raises(ValueError):
        build_chebyshev_lp(np.ones((2, 1)), [0.0, 1.0], keep=[])


@given(st.integers(0, 10**6))
def test_chebyshev_permutation_and_ls_dominance(seed):
    rng = np.random.default_rng(seed)
    N, m = int(rng.integers(2, 9)), int(rng.integers(1, 4))
    D, y = rng.normal(size=(N, m)), rng.normal(size=N)
    perm = rng.permutation(N)
    _, g1 = chebyshev_fit(D, y)
    _, g2 = chebyshev_fit(D[perm], y[perm])
    assert g1 == pytest.approx(g2, abs=1e-9)
    ls = solve_least_squares(D, y)
    assert g1 <= np.max(np.abs(y - D @ ls)) + 1e-9


def test_least_squares_examples():
    np.testing.assert_allclose(solve_least_squares(np.eye(2), [1.0, 2.0]), [1, 2])
    np.testing.assert_allclose(solve_least_squares(np.ones((2, 1)), [0.0, 1.0]), [0.5])
    D = np.column_stack([np.arange(4.0), np.arange(4.0)])
    y = np.array([0.3, 1.1, 2.2, 2.9])
    c = solve_least_squares(D, y)
    assert c[0] == pytest.approx(c[1])
    # normal-equation pseudoinverse gives the same minimum-norm solution
    np.testing.assert_allclose(c, np.linalg.pinv(D.T @ D) @ D.T @ y, atol=1e-12)
