from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sprm.errors import BudgetExceeded
from sprm.lp import chebyshev_fit
from sprm.oracle import (MilpInstance, anomalous_subset_oracle, enumeration_size,
                         solve_milp_exact)


def line_with_outlier():
    x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    y = x.copy()
    y[2] = 10.0
    return np.column_stack([np.ones(5), x]), y


def brute_force(D, y, l_m, l_b):
    """Plain double loop over supports and kept sets."""
    N, m = D.shape
    best = np.inf
    for cols in combinations(range(m), l_m):
        for keep in combinations(range(N), l_b):
            best = min(best, chebyshev_fit(D[:, list(cols)], y, list(keep))[1])
    return best


def random_inst(seed, max_m=5, max_n=8):
    rng = np.random.default_rng(seed)
    N, m = int(rng.integers(2, max_n + 1)), int(rng.integers(1, max_m + 1))
    D = rng.uniform(-1, 1, (N, m))
    y = rng.normal(size=N)
    return D, y, int(rng.integers(1, m + 1)), int(rng.integers(1, N + 1))


def test_line_plus_outlier():
    D, y = line_with_outlier()
    sol = solve_milp_exact(MilpInstance(D, y, 1, 4))
    assert sol.support == (1,) and sol.excluded == (2,)
    assert sol.gamma == pytest.approx(0.0, abs=1e-9)
    assert sol.big_m_valid
    assert anomalous_subset_oracle(D, y, (0, 1), 1) == (2,)
    assert anomalous_subset_oracle(D, y, (0, 1), 0) == ()


def test_no_selection_pressure_matches_plain_fit():
    rng = np.random.default_rng(3)
    D, y = rng.normal(size=(6, 3)), rng.normal(size=6)
    sol = solve_milp_exact(MilpInstance(D, y, 3, 6))
    assert sol.gamma == pytest.approx(chebyshev_fit(D, y)[1], abs=1e-9)


def test_duplicate_rows_tie_to_lowest_index():
    D = np.ones((4, 1))
    y = np.array([0.0, 0.0, 1.0, 1.0])
    g = [chebyshev_fit(D, y, [k for k in range(4) if k != j])[1] for j in range(4)]
    assert g[0] == g[1] == g[2] == g[3]
    sol = solve_milp_exact(MilpInstance(D, y, 1, 3))
    assert sol.excluded == (0,)
    assert anomalous_subset_oracle(D, y, (0,), 1) == (0,)


def test_equal_residual_ties_give_smallest_subset():
    D = np.ones((4, 1))
    y = np.zeros(4)
    assert anomalous_subset_oracle(D, y, (0,), 2) == (0, 1)


@given(st.integers(0, 10**6))
@settings(max_examples=40)
def test_search_equals_brute_force(seed):
    D, y, l_m, l_b = random_inst(seed)
    inst = MilpInstance(D, y, l_m, l_b)
    a = solve_milp_exact(inst, method="enumerate")
    b = solve_milp_exact(inst, method="bnb")
    assert a.support == b.support and a.excluded == b.excluded
    assert a.gamma == pytest.approx(b.gamma, abs=1e-9)
    assert a.gamma == pytest.approx(brute_force(D, y, l_m, l_b), abs=1e-9)
    assert int(a.s.sum()) == l_m and int(a.b.sum()) == l_b


@given(st.integers(0, 10**6))
@settings(max_examples=30)
def test_monotone_in_counts(seed):
    D, y, l_m, l_b = random_inst(seed, max_m=4, max_n=7)
    g = lambda lm, lb: solve_milp_exact(MilpInstance(D, y, lm, lb)).gamma
    if l_b > 1:
        assert g(l_m, l_b - 1) <= g(l_m, l_b) + 1e-9
    if l_m < D.shape[1]:
        assert g(l_m + 1, l_b) <= g(l_m, l_b) + 1e-9


@given(st.integers(0, 10**6))
@settings(max_examples=25)
def test_milp_removes_definition_subset(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(6, 10))
    x = rng.uniform(0, 1, N)
    D = np.column_stack([np.ones(N), x])
    y = 1 + 2 * x + rng.normal(0, 0.01, N)
    bad = rng.choice(N, 2, replace=False)
    y[bad] += rng.uniform(3, 5, 2)
    J = anomalous_subset_oracle(D, y, (0, 1), 2)
    sol = solve_milp_exact(MilpInstance(D, y, 2, N - 2))
    assert sol.excluded == J == tuple(sorted(int(k) for k in bad))


def test_budget_reports_incumbent():
    D, y, _, _ = random_inst(1, max_m=5, max_n=8)
    inst = MilpInstance(D, y, 2, D.shape[0] - 2)
    with pytest.raises(BudgetExceeded) as info:
        solve_milp_exact(inst, budget=3, method="enumerate")
    assert info.value.incumbent is not None
    assert enumeration_size(inst) > 3


def test_instance_validation():
    with pytest.raises(ValueError):
        MilpInstance(np.ones((3, 2)), np.zeros(3), 3, 2)
    with pytest.raises(ValueError):
        MilpInstance(np.ones((3, 2)), np.zeros(3), 1, 0)
    with pytest.raises(ValueError):
        MilpInstance(np.ones((3, 2)), np.zeros(3), 1, 2, M=0.0)
