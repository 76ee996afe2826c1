"""Small dense linear programming engine and the minimax regression LPs.

The solver is a bounded-variable primal simplex on a dense tableau. Pricing
is Dantzig's rule, switching to Bland's smallest-index rule whenever a run of
degenerate pivots appears, which rules out cycling while keeping the pivot
sequence a deterministic function of the input.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, NumericalBreakdown

LE, EQ, GE = "<=", "=", ">="
_SENSES = (LE, EQ, GE)

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
TINY_PIVOT = 1e-12
DEGENERATE_RUN = 30
REFACTOR_EVERY = 100


def _ro(a, dtype=float):
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LpProblem:
    """``min objective @ x`` subject to row constraints and variable bounds.

    The constraint matrix is stored as coordinate triples
    ``(rows[t], cols[t], vals[t])``; duplicates are summed.
    """

    objective: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = _ro(np.ravel(self.objective))
        n = c.shape[0]
        rows, cols = _ro(np.ravel(self.rows), int), _ro(np.ravel(self.cols), int)
        vals = _ro(np.ravel(self.vals))
        rhs = _ro(np.ravel(self.rhs))
        senses = tuple(self.senses)
        lower, upper = _ro(np.ravel(self.lower)), _ro(np.ravel(self.upper))
        if not (rows.shape == cols.shape == vals.shape):
            raise DimensionError("coordinate arrays must have equal length")
        if len(senses) != rhs.shape[0]:
            raise DimensionError(f"{len(senses)} senses for {rhs.shape[0]} right-hand sides")
        if any(s not in _SENSES for s in senses):
            raise ValueError(f"row senses must be among {_SENSES}")
        if cols.size and (cols.max() >= n or cols.min() < 0):
            raise DimensionError("column index out of range")
        if rows.size and (rows.max() >= rhs.shape[0] or rows.min() < 0):
            raise DimensionError("row index out of range")
        if lower.shape != (n,) or upper.shape != (n,):
            raise DimensionError("bounds must have one entry per variable")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        for name, val in (("objective", c), ("rows", rows), ("cols", cols), ("vals", vals),
                          ("senses", senses), ("rhs", rhs), ("lower", lower), ("upper", upper)):
            object.__setattr__(self, name, val)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def n_rows(self) -> int:
        return self.rhs.shape[0]

    def dense(self) -> np.ndarray:
        A = np.zeros((self.n_rows, self.n_vars))
        np.add.at(A, (self.rows, self.cols), self.vals)
        return A

    @classmethod
    def from_dense(cls, objective, A, senses, rhs, lower=None, upper=None) -> "LpProblem":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        n = np.ravel(objective).shape[0]
        if A.size == 0:
            A = A.reshape(0, n)
        r, c = np.nonzero(A)
        lower = np.full(n, -np.inf) if lower is None else lower
        upper = np.full(n, np.inf) if upper is None else upper
        if isinstance(senses, str):
            senses = (senses,) * A.shape[0]
        return cls(objective, r, c, A[r, c], tuple(senses), rhs, lower, upper)

    def violation(self, x) -> float:
        """Largest row or bound violation at ``x``."""
        x = np.asarray(x, dtype=float)
        act = self.dense() @ x
        worst = 0.0
        for a, s, b in zip(act, self.senses, self.rhs):
            if s == LE:
                worst = max(worst, a - b)
            elif s == GE:
                worst = max(worst, b - a)
            else:
                worst = max(worst, abs(a - b))
        worst = max(worst, float(np.max(self.lower - x, initial=0.0)),
                    float(np.max(x - self.upper, initial=0.0)))
        return worst


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray]
    objective: float
    iterations: int
    max_violation: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Working state of the bounded-variable simplex (columns: x, w, artificials)."""

    def __init__(self, p: LpProblem, rule: str):
        A = p.dense()
        m, n = A.shape
        self.m, self.n = m, n
        self.rule = rule
        lw = np.where([s == GE or s == EQ for s in p.senses], p.rhs, -np.inf) if m else np.zeros(0)
        uw = np.where([s == LE or s == EQ for s in p.senses], p.rhs, np.inf) if m else np.zeros(0)

        x0 = np.where(np.isfinite(p.lower), p.lower,
                      np.where(np.isfinite(p.upper), p.upper, 0.0))
        w0 = A @ x0
        scale = 1.0 + np.abs(p.rhs)
        bad = (w0 < lw - FEAS_TOL * scale) | (w0 > uw + FEAS_TOL * scale)
        art_rows = np.flatnonzero(bad)
        k = art_rows.size

        F = np.zeros((m, n + m + k))
        F[:, :n] = A
        F[:, n:n + m] = -np.eye(m)
        self.lo = np.concatenate([p.lower, lw, np.zeros(k)])
        self.hi = np.concatenate([p.upper, uw, np.full(k, np.inf)])
        x = np.concatenate([x0, w0, np.zeros(k)])
        diag = -np.ones(m)
        basis = np.arange(n, n + m)
        for t, i in enumerate(art_rows):
            bound = lw[i] if w0[i] < lw[i] else uw[i]
            resid = bound - (w0[i] if np.isfinite(w0[i]) else 0.0)
            sigma = 1.0 if resid >= 0 else -1.0
            F[i, n + m + t] = sigma
            x[n + i] = bound
            x[n + m + t] = abs(resid)
            basis[i] = n + m + t
            diag[i] = sigma
        self.F = F
        self.T = F / diag[:, None]
        self.x = x
        self.basis = basis
        self.is_basic = np.zeros(F.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self.n_art = k
        self.iterations = 0
        self.max_iter = 50 * (m + n + k) + 1000
        self.rhs_scale = float(np.max(scale, initial=1.0))

    # -- linear algebra helpers -------------------------------------------
    def refactor(self):
        B = self.F[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.F)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown("basis matrix became singular") from exc
        nb = ~self.is_basic
        self.x[self.basis] = -self.T[:, nb] @ self.x[nb]

    def drift(self) -> float:
        return float(np.max(np.abs(self.F @ self.x), initial=0.0))

    def pivot(self, r: int, j: int):
        piv = self.T[r, j]
        if abs(piv) < TINY_PIVOT:
            raise NumericalBreakdown(f"pivot magnitude {abs(piv):.3e} below {TINY_PIVOT}")
        self.T[r] /= piv
        col = self.T[:, j].copy()
        col[r] = 0.0
        self.T -= np.outer(col, self.T[r])
        leaving = self.basis[r]
        self.is_basic[leaving] = False
        self.is_basic[j] = True
        self.basis[r] = j

    # -- main loop ----------------------------------------------------------
    def run(self, cost: np.ndarray) -> str:
        degenerate = 0
        since_check = 0
        bland = self.rule == "bland"
        while True:
            if self.iterations >= self.max_iter:
                raise NumericalBreakdown(f"simplex exceeded {self.max_iter} iterations")
            d = cost - cost[self.basis] @ self.T
            nb = ~self.is_basic
            up = nb & (d < -OPT_TOL) & (self.x < self.hi - FEAS_TOL)
            down = nb & (d > OPT_TOL) & (self.x > self.lo + FEAS_TOL)
            cand = up | down
            if not cand.any():
                return "optimal"
            if bland:
                j = int(np.flatnonzero(cand)[0])
            else:
                j = int(np.argmax(np.where(cand, np.abs(d), -1.0)))
            direction = 1.0 if up[j] else -1.0
            delta = -direction * self.T[:, j]
            xb = self.x[self.basis]
            lob, hib = self.lo[self.basis], self.hi[self.basis]
            ratios = np.full(self.m, np.inf)
            dec = delta < -PIVOT_TOL
            inc = delta > PIVOT_TOL
            ratios[dec] = (xb[dec] - lob[dec]) / -delta[dec]
            ratios[inc] = (hib[inc] - xb[inc]) / delta[inc]
            np.maximum(ratios, 0.0, out=ratios)
            own = self.hi[j] - self.lo[j]
            best = float(ratios.min(initial=np.inf))
            self.iterations += 1
            if own <= best:
                if not np.isfinite(own):
                    return "unbounded"
                self.x[j] += direction * own
                self.x[self.basis] += own * delta
                degenerate = 0 if own > TINY_PIVOT else degenerate + 1
                continue
            ties = np.flatnonzero(ratios <= best + 1e-12 * (1.0 + best))
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(delta[ties]))])
            theta = best
            self.x[j] += direction * theta
            self.x[self.basis] += theta * delta
            leaving = self.basis[r]
            self.x[leaving] = self.lo[leaving] if delta[r] < 0 else self.hi[leaving]
            self.pivot(r, j)

            if theta <= TINY_PIVOT:
                degenerate += 1
                if degenerate > DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
                bland = self.rule == "bland"

            since_check += 1
            if since_check >= REFACTOR_EVERY:
                since_check = 0
                if self.drift() > 1e-9 * self.rhs_scale:
                    self.refactor()

    def drive_out_artificials(self):
        first_art = self.n + self.m
        for r in range(self.m):
            if self.basis[r] < first_art:
                continue
            row = np.abs(self.T[r, :first_art])
            row[self.is_basic[:first_art]] = 0.0
            cand = np.flatnonzero(row > 1e-7)
            if cand.size:
                # degenerate exchange: the artificial sits at zero
                self.pivot(r, int(cand[0]))
        self.lo[first_art:] = 0.0
        self.hi[first_art:] = 0.0


def solve_lp(p: LpProblem, rule: str = "dantzig", mps_dump: Optional[str] = None) -> LpSolution:
    """Solve ``p`` to an optimal basic solution or report infeasible/unbounded.

    ``rule`` is ``"dantzig"`` (with the Bland fallback) or ``"bland"``.
    Setting ``mps_dump`` (or the ``SPRM_LP_DUMP`` environment variable to a
    directory) writes the problem in fixed MPS format before solving.
    """
    if rule not in ("dantzig", "bland"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    dump_dir = os.environ.get("SPRM_LP_DUMP")
    if mps_dump is None and dump_dir:
        os.makedirs(dump_dir, exist_ok=True)
        mps_dump = os.path.join(dump_dir, f"lp_{os.getpid()}_{id(p):x}.mps")
    if mps_dump:
        with open(mps_dump, "w") as fh:
            fh.write(to_mps(p))

    tab = _Tableau(p, rule)
    if tab.n_art:
        cost1 = np.zeros(tab.F.shape[1])
        cost1[tab.n + tab.m:] = 1.0
        tab.run(cost1)
        infeas = float(tab.x[tab.n + tab.m:].sum())
        if infeas > FEAS_TOL * tab.rhs_scale:
            return LpSolution("infeasible", None, float("nan"), tab.iterations)
        tab.drive_out_artificials()
    cost2 = np.zeros(tab.F.shape[1])
    cost2[:tab.n] = p.objective
    status = tab.run(cost2)
    if status == "unbounded":
        return LpSolution("unbounded", None, -np.inf, tab.iterations)
    if tab.drift() > 1e-9 * tab.rhs_scale:
        tab.refactor()
    x = tab.x[:tab.n].copy()
    viol = p.violation(x)
    if viol > 1e-6 * tab.rhs_scale:
        raise NumericalBreakdown(f"final point violates constraints by {viol:.3e}")
    return LpSolution("optimal", x, float(p.objective @ x), tab.iterations, viol)


def _mps_num(v: float) -> str:
    s = repr(float(v))
    if len(s) > 12:
        s = f"{v:.6e}"
    return s


def to_mps(p: LpProblem, name: str = "SPRMLP") -> str:
    """Fixed-column MPS rendering of ``p`` (for cross-checking with other solvers)."""
    A = p.dense()
    kinds = {LE: "L", GE: "G", EQ: "E"}
    out = [f"NAME          {name}", "ROWS", " N  OBJ"]
    rname = [f"R{i:07d}" for i in range(p.n_rows)]
    cname = [f"C{j:07d}" for j in range(p.n_vars)]
    for i, s in enumerate(p.senses):
        out.append(f" {kinds[s]}  {rname[i]}")
    out.append("COLUMNS")
    for j in range(p.n_vars):
        entries = [("OBJ", p.objective[j])] if p.objective[j] != 0 else []
        entries += [(rname[i], A[i, j]) for i in np.flatnonzero(A[:, j])]
        if not entries:
            entries = [("OBJ", 0.0)]
        for t in range(0, len(entries), 2):
            line = f"    {cname[j]:<8}  {entries[t][0]:<8}  {_mps_num(entries[t][1]):>12}"
            if t + 1 < len(entries):
                line += f"   {entries[t + 1][0]:<8}  {_mps_num(entries[t + 1][1]):>12}"
            out.append(line)
    out.append("RHS")
    for i in np.flatnonzero(p.rhs):
        out.append(f"    {'RHS':<8}  {rname[i]:<8}  {_mps_num(p.rhs[i]):>12}")
    out.append("BOUNDS")
    for j in range(p.n_vars):
        lo, hi = p.lower[j], p.upper[j]
        if lo == hi:
            out.append(f" FX BND       {cname[j]:<8}  {_mps_num(lo):>12}")
            continue
        if np.isneginf(lo) and np.isposinf(hi):
            out.append(f" FR BND       {cname[j]:<8}")
            continue
        if np.isneginf(lo):
            out.append(f" MI BND       {cname[j]:<8}")
        elif lo != 0.0:
            out.append(f" LO BND       {cname[j]:<8}  {_mps_num(lo):>12}")
        if np.isfinite(hi):
            out.append(f" UP BND       {cname[j]:<8}  {_mps_num(hi):>12}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# minimax regression LPs

def build_chebyshev_lp(design, y, keep: Optional[Sequence[int]] = None) -> LpProblem:
    """Minimax fit ``min gamma  s.t. |y_k - design[k] @ c| <= gamma`` over ``keep``.

    Variables are ordered ``(c_1, ..., c_m, gamma)``; each absolute value
    becomes a pair of rows.
    """
    design = np.atleast_2d(np.asarray(design, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if design.shape[0] != y.shape[0]:
        raise DimensionError(f"design has {design.shape[0]} rows, y has {y.shape[0]}")
    keep = list(range(len(y))) if keep is None else sorted(int(k) for k in keep)
    if not keep:
        raise ValueError("the kept row set is empty")
    m = design.shape[1]
    D = design[keep]
    K = len(keep)
    A = np.zeros((2 * K, m + 1))
    A[:K, :m] = -D
    A[K:, :m] = D
    A[:, m] = -1.0
    rhs = np.concatenate([-y[keep], y[keep]])
    cost = np.zeros(m + 1)
    cost[m] = 1.0
    lower = np.full(m + 1, -np.inf)
    lower[m] = 0.0
    return LpProblem.from_dense(cost, A, LE, rhs, lower, np.full(m + 1, np.inf))


def chebyshev_fit(design, y, keep: Optional[Sequence[int]] = None) -> tuple[np.ndarray, float]:
    """Solve the minimax LP and return ``(coefficients, gamma)``."""
    design = np.atleast_2d(np.asarray(design, dtype=float))
    sol = solve_lp(build_chebyshev_lp(design, y, keep))
    if not sol.optimal:  # bounded below by 0 and always feasible
        raise NumericalBreakdown(f"minimax LP returned status {sol.status}")
    m = design.shape[1]
    return sol.x[:m], max(float(sol.x[m]), 0.0)


def solve_least_squares(design, y) -> np.ndarray:
    """Minimum-norm least-squares coefficients."""
    design = np.atleast_2d(np.asarray(design, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if design.shape[0] != y.shape[0]:
        raise DimensionError(f"design has {design.shape[0]} rows, y has {y.shape[0]}")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coef
