"""The fractional change of variables and the two models it connects.

A point ``(c, s, b, gamma)`` of the binary-enforcing QCQP is sent to
``(c_hat, s_hat, b_hat, gamma_hat, v_hat)`` by dividing the vector
``sqrt(rho-1) * (c, r*s, r*b, gamma, 1)`` (with ``r = sqrt(rho/(rho-1))``) by

    sqrt((rho-1) * (|s|^2 + |b|^2 + 1) + sum(s) + sum(b)).

At any binary point with ``sum(s) = l_m`` and ``sum(b) = l_b`` the last
coordinate equals ``sqrt(rho-1) / sqrt(rho*(l_m+l_b+1) - 1)``, which is the
value the fractional model pins ``v_hat`` to. The count constraints of the
fractional model carry the factor ``v_hat`` on their right-hand side; without
it the image of a feasible point would not be feasible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, DivisionHazard
from .oracle import DEFAULT_BIG_M, MilpInstance

V_HAT_MIN = 1e-12


def _vec(a) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True).ravel()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QcqpPoint:
    c: np.ndarray
    s: np.ndarray
    b: np.ndarray
    gamma: float

    def __post_init__(self):
        for name in ("c", "s", "b"):
            object.__setattr__(self, name, _vec(getattr(self, name)))
        object.__setattr__(self, "gamma", float(self.gamma))


@dataclass(frozen=True)
class FpPoint:
    c_hat: np.ndarray
    s_hat: np.ndarray
    b_hat: np.ndarray
    gamma_hat: float
    v_hat: float

    def __post_init__(self):
        for name in ("c_hat", "s_hat", "b_hat"):
            object.__setattr__(self, name, _vec(getattr(self, name)))
        object.__setattr__(self, "gamma_hat", float(self.gamma_hat))
        object.__setattr__(self, "v_hat", float(self.v_hat))

    @property
    def z(self) -> np.ndarray:
        """Stacked ``(s_hat, b_hat, v_hat)``, the vector the conic relaxations lift."""
        return np.concatenate([self.s_hat, self.b_hat, [self.v_hat]])

    @property
    def objective(self) -> float:
        return self.gamma_hat / self.v_hat


def convexity_threshold(m_d: int, N: int) -> float:
    """Smallest rho for which the quadratic constraint is an ellipsoid."""
    return 1.0 + sqrt(m_d + N) / 2.0


def default_rho(m_d: int, N: int) -> float:
    return max(2.0, 1.0 + sqrt(m_d + N))


def pinned_v_hat(rho: float, l_m: int, l_b: int) -> float:
    return sqrt(rho - 1.0) / sqrt(rho * (l_m + l_b + 1) - 1.0)


def uncorrected_v_hat(rho: float, m_d: int, N: int) -> float:
    """Variant built from all candidates instead of the counts (kept for comparison)."""
    return sqrt(rho - 1.0) / sqrt(rho * (m_d + N + 1) - 1.0)


@dataclass(frozen=True)
class FpModel:
    """Data and constants of the fractional program.

    ``uncorrected_constants=True`` switches the count constraints and the pinned
    ``v_hat`` to the variant without the ``v_hat`` factor and with ``m_d + N + 1``.
    That variant is infeasible for every practical instance and exists only
    so the discrepancy can be demonstrated.
    """

    design: np.ndarray
    y: np.ndarray
    l_m: int
    l_b: int
    M: float
    rho: float
    v_const: float = field(default=float("nan"))
    uncorrected_constants: bool = False

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.design, dtype=float)).copy()
        y = np.asarray(self.y, dtype=float).ravel().copy()
        if D.shape[0] != y.shape[0]:
            raise DimensionError(f"design has {D.shape[0]} rows, y has {y.shape[0]}")
        D.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "design", D)
        object.__setattr__(self, "y", y)
        N, m = D.shape
        if not 1 <= self.l_m <= m or not 1 <= self.l_b <= N:
            raise ValueError(f"need 1 <= l_m <= {m} and 1 <= l_b <= {N}")
        if self.rho < convexity_threshold(m, N) - 1e-12:
            raise ValueError(
                f"rho={self.rho} below the convexity threshold {convexity_threshold(m, N):.6g}")
        if np.isnan(self.v_const):
            v = (uncorrected_v_hat(self.rho, m, N) if self.uncorrected_constants
                 else pinned_v_hat(self.rho, self.l_m, self.l_b))
            object.__setattr__(self, "v_const", v)

    @classmethod
    def build(cls, design, y, l_m, l_b, M=DEFAULT_BIG_M, rho=None, uncorrected_constants=False):
        design = np.atleast_2d(np.asarray(design, dtype=float))
        if rho is None:
            rho = default_rho(design.shape[1], design.shape[0])
        return cls(design, y, l_m, l_b, M, rho, uncorrected_constants=uncorrected_constants)

    @classmethod
    def from_instance(cls, inst: MilpInstance, rho=None) -> "FpModel":
        return cls.build(inst.design, inst.y, inst.l_m, inst.l_b, inst.M, rho)

    @property
    def N(self) -> int:
        return self.design.shape[0]

    @property
    def m(self) -> int:
        return self.design.shape[1]

    @property
    def kappa(self) -> float:
        """``sqrt((rho-1)/rho)``: maps scaled indicators back to [0, 1]."""
        return sqrt((self.rho - 1.0) / self.rho)

    @property
    def indicator_cap(self) -> float:
        """Upper bound on every ``s_hat`` / ``b_hat`` entry."""
        return self.v_const / self.kappa

    def count_rhs(self, count: int, v_hat: float) -> float:
        """Right-hand side of a count equality at a point with the given ``v_hat``."""
        if self.uncorrected_constants:
            return count / self.kappa
        return count * v_hat / self.kappa


def map_forward(p: QcqpPoint, rho: float) -> FpPoint:
    if rho <= 1:
        raise ValueError("rho must exceed 1")
    s2 = float(p.s @ p.s)
    b2 = float(p.b @ p.b)
    denom = sqrt((rho - 1.0) * (s2 + b2 + 1.0) + p.s.sum() + p.b.sum())
    scale = sqrt(rho - 1.0) / denom
    ind = sqrt(rho / (rho - 1.0))
    return FpPoint(scale * p.c, scale * ind * p.s, scale * ind * p.b,
                   scale * p.gamma, scale)


def map_inverse(q: FpPoint, rho: float) -> QcqpPoint:
    if q.v_hat <= V_HAT_MIN:
        raise DivisionHazard(f"v_hat={q.v_hat:.3e} is too small to invert")
    if rho <= 1:
        raise ValueError("rho must exceed 1")
    ind = sqrt(rho - 1.0) / (sqrt(rho) * q.v_hat)
    return QcqpPoint(q.c_hat / q.v_hat, ind * q.s_hat, ind * q.b_hat, q.gamma_hat / q.v_hat)


@dataclass(frozen=True)
class ResidualReport:
    """Worst signed residual per constraint family (positive means violated)."""

    residuals: dict
    tol: float

    @property
    def worst(self) -> float:
        return max(self.residuals.values())

    @property
    def feasible(self) -> bool:
        return self.worst <= self.tol

    def violated(self) -> list[str]:
        return [k for k, v in self.residuals.items() if v > self.tol]


def _check_dims(m, N, s, b, c):
    if s.shape[0] != m or c.shape[0] != m or b.shape[0] != N:
        raise DimensionError(f"point dimensions ({c.shape[0]}, {s.shape[0]}, {b.shape[0]}) "
                             f"do not match m_d={m}, N={N}")


def check_qcqp_feasible(inst: MilpInstance, p: QcqpPoint, tol: float = 1e-8) -> ResidualReport:
    _check_dims(inst.m, inst.N, p.s, p.b, p.c)
    M = inst.M
    resid = np.abs(inst.y - inst.design @ p.c)
    box = max(float(np.max(-p.s)), float(np.max(p.s - 1)),
              float(np.max(-p.b)), float(np.max(p.b - 1)), -p.gamma)
    r = {
        "kept_residual": float(np.max(-M * (1 - p.b) + resid - p.gamma)),
        "coef_link": float(np.max(np.abs(p.c) - M * p.s)),
        "point_count": abs(float(p.b.sum()) - inst.l_b),
        "monomial_count": abs(float(p.s.sum()) - inst.l_m),
        "binary": float(p.s.sum() + p.b.sum() - p.s @ p.s - p.b @ p.b),
        "bounds": box,
    }
    return ResidualReport(r, tol)


def quadratic_terms(model: FpModel, q: FpPoint) -> tuple[float, float]:
    """Left-hand sides of the convex ellipsoid and the nonconvex sphere constraints."""
    Q = float(q.s_hat @ q.s_hat + q.b_hat @ q.b_hat)
    S = float(q.s_hat.sum() + q.b_hat.sum())
    rho, v = model.rho, q.v_hat
    ellipsoid = (rho - 1) / rho * Q + v * S / (sqrt(rho) * sqrt(rho - 1)) + v * v
    sphere = Q + v * v
    return ellipsoid, sphere


def _fp_linear_residuals(model: FpModel, q: FpPoint) -> dict:
    _check_dims(model.m, model.N, q.s_hat, q.b_hat, q.c_hat)
    M, k, v = model.M, model.kappa, q.v_hat
    cap = v / k
    resid = np.abs(model.y * v - model.design @ q.c_hat)
    return {
        "kept_residual": float(np.max(-M * v + k * M * q.b_hat + resid - q.gamma_hat)),
        "coef_link": float(np.max(np.abs(q.c_hat) - k * M * q.s_hat)),
        "monomial_box": float(max(np.max(-q.s_hat), np.max(q.s_hat - cap))),
        "point_box": float(max(np.max(-q.b_hat), np.max(q.b_hat - cap))),
        "point_count": abs(float(q.b_hat.sum()) - model.count_rhs(model.l_b, v)),
        "monomial_count": abs(float(q.s_hat.sum()) - model.count_rhs(model.l_m, v)),
        "v_pin": abs(v - model.v_const),
        "gamma": -q.gamma_hat,
    }


def check_fp_feasible(model: FpModel, q: FpPoint, tol: float = 1e-8) -> ResidualReport:
    r = _fp_linear_residuals(model, q)
    ellipsoid, sphere = quadratic_terms(model, q)
    r["ellipsoid"] = ellipsoid - 1.0
    r["sphere"] = 1.0 - sphere
    return ResidualReport(r, tol)


class ConvexityCheck(NamedTuple):
    min_eigenvalue: float
    is_convex: bool
    schur: float


def ellipsoid_matrix(m_d: int, N: int, rho: float) -> np.ndarray:
    """Symmetric matrix of the quadratic form in ``(s_hat, b_hat, v_hat)``."""
    n = m_d + N
    H = np.zeros((n + 1, n + 1))
    H[np.arange(n), np.arange(n)] = (rho - 1.0) / rho
    H[n, n] = 1.0
    off = 1.0 / (2.0 * sqrt(rho) * sqrt(rho - 1.0))
    H[:n, n] = off
    H[n, :n] = off
    return H


def ellipsoid_psd_check(m_d: int, N: int, rho: float, tol: float = 1e-9) -> ConvexityCheck:
    """Minimum eigenvalue of the ellipsoid matrix and the Schur complement scalar."""
    if m_d < 1 or N < 1 or rho <= 1:
        raise ValueError("need m_d, N >= 1 and rho > 1")
    lam = float(np.linalg.eigvalsh(ellipsoid_matrix(m_d, N, rho))[0])
    schur = 1.0 - (m_d + N) / (4.0 * (rho - 1.0) ** 2)
    return ConvexityCheck(lam, lam >= -tol, schur)
