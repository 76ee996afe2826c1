"""Exact solution of the sparse minimax regression MILP at desk scale.

The MILP picks ``l_m`` monomials (columns) and keeps ``l_b`` data points
(rows) so that the minimax residual over kept rows is smallest. For a fixed
choice the optimal coefficients come from one Chebyshev LP, so the problem
is a search over (support, kept rows) pairs.

Candidates are visited in lexicographic order of ``(support, excluded rows)``
and an incumbent is only replaced by a strictly better value (beyond
``tie_tol``), so the reported optimum is the lexicographically smallest one.
Exhaustive enumeration and branch-and-bound follow the same order and return
identical answers.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, DimensionError
from .lp import chebyshev_fit

DEFAULT_BIG_M = 1e3
DEFAULT_NODE_BUDGET = 10**6
TIE_TOL = 1e-9


@dataclass(frozen=True)
class MilpInstance:
    design: np.ndarray
    y: np.ndarray
    l_m: int
    l_b: int
    M: float = DEFAULT_BIG_M

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.design, dtype=float)).copy()
        y = np.asarray(self.y, dtype=float).ravel().copy()
        if D.shape[0] != y.shape[0]:
            raise DimensionError(f"design has {D.shape[0]} rows, y has {y.shape[0]}")
        N, m = D.shape
        if not 1 <= self.l_m <= m:
            raise ValueError(f"l_m={self.l_m} outside [1, {m}]")
        if not 1 <= self.l_b <= N:
            raise ValueError(f"l_b={self.l_b} outside [1, {N}]")
        if not self.M > 0:
            raise ValueError("big-M must be positive")
        D.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "design", D)
        object.__setattr__(self, "y", y)

    @property
    def N(self) -> int:
        return self.design.shape[0]

    @property
    def m(self) -> int:
        return self.design.shape[1]


@dataclass(frozen=True)
class MilpSolution:
    s: np.ndarray
    b: np.ndarray
    c: np.ndarray
    gamma: float
    nodes: int
    big_m_valid: bool = True

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.s))

    @property
    def excluded(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(self.b == 0))


class _Search:
    def __init__(self, inst: MilpInstance, budget: int, tie_tol: float):
        self.inst = inst
        self.budget = budget
        self.tol = tie_tol
        self.nodes = 0
        self.best_gamma = np.inf
        self.best: Optional[tuple[tuple[int, ...], tuple[int, ...], np.ndarray]] = None

    def lp(self, cols, rows):
        if self.nodes >= self.budget:
            raise BudgetExceeded(f"node budget {self.budget} exhausted", self.solution())
        self.nodes += 1
        c, g = chebyshev_fit(self.inst.design[:, list(cols)], self.inst.y, rows)
        return c, g

    def offer(self, cols, excluded, c, g):
        if g < self.best_gamma - self.tol:
            self.best_gamma = g
            self.best = (tuple(cols), tuple(excluded), c)

    def solution(self) -> Optional[MilpSolution]:
        if self.best is None:
            return None
        cols, excluded, c_sub = self.best
        inst = self.inst
        s = np.zeros(inst.m, dtype=int)
        s[list(cols)] = 1
        b = np.ones(inst.N, dtype=int)
        b[list(excluded)] = 0
        c = np.zeros(inst.m)
        c[list(cols)] = c_sub
        gamma = float(self.best_gamma)
        resid = np.abs(inst.y - inst.design @ c)
        valid = bool(np.max(np.abs(c)) <= inst.M
                     and np.all(resid[b == 0] <= gamma + inst.M))
        return MilpSolution(s, b, c, gamma, self.nodes, valid)

    # -- strategies -----------------------------------------------------------
    def enumerate(self):
        N, n_excl = self.inst.N, self.inst.N - self.inst.l_b
        for cols in combinations(range(self.inst.m), self.inst.l_m):
            for excluded in combinations(range(N), n_excl):
                keep = [k for k in range(N) if k not in set(excluded)]
                c, g = self.lp(cols, keep)
                self.offer(cols, excluded, c, g)

    def branch_and_bound(self):
        for cols in combinations(range(self.inst.m), self.inst.l_m):
            self._rows(cols, 0, [], [], None, 0.0)

    def _rows(self, cols, k, kept, excluded, fit, bound):
        N, n_excl = self.inst.N, self.inst.N - self.inst.l_b
        if len(excluded) == n_excl:
            rows = kept + list(range(k, N))
            if rows == kept and fit is not None:
                self.offer(cols, excluded, fit, bound)
            else:
                c, g = self.lp(cols, rows)
                self.offer(cols, excluded, c, g)
            return
        if N - k == n_excl - len(excluded):
            self.offer(cols, excluded + list(range(k, N)), fit, bound)
            return
        # exclude-first keeps the depth-first order lexicographic in the excluded set
        self._rows(cols, k + 1, kept, excluded + [k], fit, bound)
        c, g = self.lp(cols, kept + [k])
        if g >= self.best_gamma - self.tol:
            return
        self._rows(cols, k + 1, kept + [k], excluded, c, g)


def solve_milp_exact(inst: MilpInstance, budget: int = DEFAULT_NODE_BUDGET,
                     method: str = "auto", tie_tol: float = TIE_TOL) -> MilpSolution:
    """Globally optimal support, kept rows, coefficients and minimax error.

    ``method`` is ``"enumerate"``, ``"bnb"`` or ``"auto"`` (enumeration when
    ``m_d + N <= 20``, branch-and-bound otherwise). Every LP solved counts as
    one node against ``budget``.
    """
    if method == "auto":
        method = "enumerate" if inst.m + inst.N <= 20 else "bnb"
    search = _Search(inst, budget, tie_tol)
    if method == "enumerate":
        search.enumerate()
    elif method == "bnb":
        search.branch_and_bound()
    else:
        raise ValueError(f"unknown method {method!r}")
    return search.solution()


def enumeration_size(inst: MilpInstance) -> int:
    return comb(inst.m, inst.l_m) * comb(inst.N, inst.N - inst.l_b)


def anomalous_subset_oracle(design, y, model_support: Sequence[int], subset_size: int,
                            budget: int = DEFAULT_NODE_BUDGET,
                            tie_tol: float = TIE_TOL) -> tuple[int, ...]:
    """Index set whose removal minimizes the best minimax error of the rest.

    The regression model uses the columns in ``model_support``; every subset
    of ``subset_size`` rows is tried (ties go to the lexicographically
    smallest subset).
    """
    design = np.atleast_2d(np.asarray(design, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    N = y.shape[0]
    if not 0 <= subset_size < N:
        raise ValueError(f"subset size must lie in [0, {N - 1}]")
    if comb(N, subset_size) > budget:
        raise BudgetExceeded(f"{comb(N, subset_size)} subsets exceed budget {budget}")
    cols = sorted(int(j) for j in model_support)
    D = design[:, cols]
    best, best_g = (), np.inf
    for J in combinations(range(N), subset_size):
        drop = set(J)
        _, g = chebyshev_fit(D, y, [k for k in range(N) if k not in drop])
        if g < best_g - tie_tol:
            best, best_g = J, g
    return tuple(best)
