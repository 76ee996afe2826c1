"""Linear-based convex relaxation of the fractional program, plus certificates.

The relaxation drops the nonconvex sphere constraint ``|s_hat|^2 + |b_hat|^2
+ v_hat^2 >= 1`` and adds its linearization ``sum(s_hat) + sum(b_hat) + v_hat
>= 1``. The remaining convex ellipsoid constraint is handled by supporting
hyperplane cuts, so only the LP engine is needed.

Note that once ``v_hat`` is pinned and the count equalities hold, the
ellipsoid and the linearized constraint are both implied by the box bounds.
The loop therefore normally stops without adding a cut, and the relaxation
coincides with the plain LP relaxation of the big-M MILP.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import sqrt
from typing import Callable, Optional

import numpy as np

from .errors import CutLimitExceeded, InfeasibleError, PreconditionError
from .fractional import (FpModel, FpPoint, ResidualReport, _fp_linear_residuals, map_inverse,
                         quadratic_terms)
from .lp import GE, LE, LpProblem, solve_lp

QUAD_TOL = 1e-7
CUT_LIMIT = 500
INTEGRALITY_TOL = 1e-6


@dataclass(frozen=True)
class ExactnessReport:
    literal_residual: float
    integrality_gap: float
    certified: bool


@dataclass(frozen=True)
class RelaxationSolution:
    point: FpPoint
    objective: float
    cuts: int
    quad_residual: float
    exactness: ExactnessReport
    history: tuple = field(default=())
    lp_iterations: int = 0


@dataclass(frozen=True)
class SdcCertificate:
    chi: np.ndarray
    trace: float
    min_eigenvalue: float
    case: int
    construction: str = "diagonal-shift"

    @property
    def valid(self) -> bool:
        return self.trace >= 1 - 1e-9 and self.min_eigenvalue >= -1e-9


@dataclass(frozen=True)
class SocReport:
    worst: float
    pair: tuple[int, int]


def _append_row(p: LpProblem, coeffs: np.ndarray, sense: str, rhs: float) -> LpProblem:
    nz = np.flatnonzero(coeffs)
    row = p.n_rows
    return LpProblem(
        p.objective,
        np.concatenate([p.rows, np.full(nz.size, row)]),
        np.concatenate([p.cols, nz]),
        np.concatenate([p.vals, coeffs[nz]]),
        p.senses + (sense,),
        np.append(p.rhs, rhs),
        p.lower,
        p.upper,
    )


def cutting_plane(base: LpProblem, g: Callable[[np.ndarray], float],
                  grad: Callable[[np.ndarray], np.ndarray], tol: float = QUAD_TOL,
                  cut_limit: int = CUT_LIMIT, trace: Optional[list] = None):
    """Minimize over ``base`` intersected with the convex set ``g(x) <= 0``.

    Each round solves the LP, and if ``g`` is violated by more than ``tol``
    adds the tangent cut ``g(x0) + grad(x0) @ (x - x0) <= 0`` scaled to a unit
    gradient. Returns ``(lp_solution, cuts_added, objective_history)``.
    """
    p = base
    history = []
    cuts = 0
    iterations = 0
    while True:
        sol = solve_lp(p)
        iterations += sol.iterations
        if not sol.optimal:
            return sol, cuts, tuple(history), iterations
        viol = g(sol.x)
        history.append(sol.objective)
        if trace is not None:
            trace.append((cuts, sol.objective, max(viol, 0.0)))
        if viol <= tol:
            return sol, cuts, tuple(history), iterations
        if cuts >= cut_limit:
            raise CutLimitExceeded(f"quadratic residual {viol:.3e} after {cuts} cuts")
        gr = grad(sol.x)
        norm = float(np.linalg.norm(gr))
        p = _append_row(p, gr / norm, LE, float(gr @ sol.x - viol) / norm)
        cuts += 1


class _Layout:
    """Column layout ``(c_hat, s_hat, b_hat, gamma_hat)`` of the relaxation LP."""

    def __init__(self, m: int, N: int):
        self.m, self.N = m, N
        self.c = slice(0, m)
        self.s = slice(m, 2 * m)
        self.b = slice(2 * m, 2 * m + N)
        self.g = 2 * m + N
        self.size = 2 * m + N + 1
        self.z = slice(m, 2 * m + N)


def relaxation_lp(model: FpModel) -> LpProblem:
    """The LP part: big-M rows, coefficient links, counts, linearized sphere."""
    m, N = model.m, model.N
    L = _Layout(m, N)
    v, k, M = model.v_const, model.kappa, model.M
    D, y = model.design, model.y
    rows = []
    rhs = []
    senses = []
    for sign in (-1.0, 1.0):
        # sign * (D c_hat - y v) + k M b_hat - gamma_hat <= M v
        block = np.zeros((N, L.size))
        block[:, L.c] = sign * D
        block[np.arange(N), L.b.start + np.arange(N)] = k * M
        block[:, L.g] = -1.0
        rows.append(block)
        rhs.append(M * v + sign * y * v)
        senses += [LE] * N
    for sign in (1.0, -1.0):
        block = np.zeros((m, L.size))
        block[np.arange(m), np.arange(m)] = sign
        block[np.arange(m), L.s.start + np.arange(m)] = -k * M
        rows.append(block)
        rhs.append(np.zeros(m))
        senses += [LE] * m
    counts = np.zeros((3, L.size))
    counts[0, L.b] = 1.0
    counts[1, L.s] = 1.0
    counts[2, L.z] = 1.0
    rows.append(counts)
    rhs.append([model.count_rhs(model.l_b, v), model.count_rhs(model.l_m, v), 1.0 - v])
    senses += ["=", "=", GE]

    cost = np.zeros(L.size)
    cost[L.g] = 1.0 / v
    lower = np.zeros(L.size)
    upper = np.full(L.size, np.inf)
    lower[L.c] = -np.inf
    upper[L.z] = model.indicator_cap
    return LpProblem.from_dense(cost, np.vstack(rows), tuple(senses), np.concatenate(rhs),
                                lower, upper)


def _ellipsoid_fns(model: FpModel):
    L = _Layout(model.m, model.N)
    rho, v = model.rho, model.v_const
    a = (rho - 1.0) / rho
    beta = v / (sqrt(rho) * sqrt(rho - 1.0))

    def g(x):
        z = x[L.z]
        return float(a * (z @ z) + beta * z.sum() + v * v - 1.0)

    def grad(x):
        out = np.zeros(L.size)
        out[L.z] = 2.0 * a * x[L.z] + beta
        return out

    return g, grad


def _point_from_lp(model: FpModel, x: np.ndarray) -> FpPoint:
    L = _Layout(model.m, model.N)
    return FpPoint(x[L.c], x[L.s], x[L.b], x[L.g], model.v_const)


def exactness_report(point: FpPoint, rho: float, tol: float = INTEGRALITY_TOL) -> ExactnessReport:
    z = point.z
    literal = abs(float(z @ z) - float(z.sum()))
    rec = map_inverse(point, rho)
    ind = np.concatenate([rec.s, rec.b])
    gap = float(np.max(np.minimum(np.abs(ind), np.abs(1.0 - ind)), initial=0.0))
    return ExactnessReport(literal, gap, gap <= tol)


def solve_linear_relaxation(model: FpModel, cut_limit: int = CUT_LIMIT,
                            quad_tol: float = QUAD_TOL,
                            integrality_tol: float = INTEGRALITY_TOL,
                            trace_csv: Optional[str] = None) -> RelaxationSolution:
    """Lower bound on the sparse minimax error from the linear-based relaxation."""
    g, grad = _ellipsoid_fns(model)
    trace = [] if trace_csv else None
    sol, cuts, history, iters = cutting_plane(relaxation_lp(model), g, grad, quad_tol,
                                              cut_limit, trace)
    if trace_csv:
        with open(trace_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "objective", "quad_residual"])
            w.writerows((i, repr(o), repr(r)) for i, o, r in trace)
    if sol.status == "infeasible":
        raise InfeasibleError("relaxation is infeasible for the given counts and bounds")
    if sol.status != "optimal":
        raise InfeasibleError(f"relaxation LP returned status {sol.status}")
    point = _point_from_lp(model, sol.x)
    ex = exactness_report(point, model.rho, integrality_tol)
    return RelaxationSolution(point, point.objective, cuts, max(g(sol.x), 0.0), ex,
                              history, iters)


def check_linear_relaxation_feasible(model: FpModel, q: FpPoint,
                                     tol: float = 1e-8) -> ResidualReport:
    r = _fp_linear_residuals(model, q)
    ellipsoid, _ = quadratic_terms(model, q)
    r["ellipsoid"] = ellipsoid - 1.0
    r["linearized_sphere"] = 1.0 - float(q.z.sum())
    return ResidualReport(r, tol)


def check_exactness(sol: RelaxationSolution, rho: float,
                    tol: float = INTEGRALITY_TOL) -> ExactnessReport:
    return exactness_report(sol.point, rho, tol)


def build_sdc_certificate(q: FpPoint, model: Optional[FpModel] = None,
                          construction: str = "diagonal-shift",
                          tol: float = 1e-8) -> SdcCertificate:
    """Lifted matrix showing ``q`` is feasible for the semidefinite relaxation.

    Case 1 (``|z|^2 >= 1``) uses ``chi = z z^T``. For Case 2 the default
    ``"diagonal-shift"`` uses ``chi = z z^T + t I`` with ``t`` chosen so the
    trace is exactly 1; ``"symmetric-outer"`` gives ``(z e^T + e z^T) / 2``,
    which has the required trace but is not positive semidefinite relative to
    ``z z^T`` unless ``z`` is a multiple of the all-ones vector.
    """
    if model is not None:
        rep = check_linear_relaxation_feasible(model, q, tol)
        if not rep.feasible:
            raise PreconditionError(f"point violates the linear relaxation: {rep.violated()}")
    z = q.z
    if np.min(z) < -tol or z.sum() < 1 - tol:
        raise PreconditionError("point violates nonnegativity or the linearized constraint")
    zz = np.outer(z, z)
    norm2 = float(z @ z)
    if norm2 >= 1.0 - 1e-12:  # on the sphere up to rounding
        chi, case = zz, 1
    elif construction == "diagonal-shift":
        chi, case = zz + (1.0 - norm2) / z.size * np.eye(z.size), 2
    elif construction == "symmetric-outer":
        e = np.ones_like(z)
        chi, case = 0.5 * (np.outer(z, e) + np.outer(e, z)), 2
    else:
        raise ValueError(f"unknown construction {construction!r}")
    lam = float(np.linalg.eigvalsh(chi - zz)[0])
    return SdcCertificate(chi, float(np.trace(chi)), lam, case, construction)


def soc_constraint_residuals(q: FpPoint, chi) -> SocReport:
    """Most violated 2x2 principal minor of ``chi - z z^T`` over pairs ``i < j``."""
    z = q.z
    chi = np.asarray(chi, dtype=float)
    if chi.shape != (z.size, z.size):
        raise ValueError(f"chi must be {z.size}x{z.size}")
    Mx = chi - np.outer(z, z)
    d = np.diag(Mx)
    minors = np.outer(d, d) - Mx * Mx
    minors[np.tril_indices(z.size)] = np.inf
    flat = int(np.argmin(minors))
    i, j = divmod(flat, z.size)
    return SocReport(float(minors[i, j]), (i, j))
