"""Randomized property suite for the reformulation and relaxation results.

Every check is seeded and reports only counts and rounded magnitudes, so a
run with a fixed seed produces identical output.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil, sqrt
from typing import Callable

import numpy as np

from .fractional import (FpModel, QcqpPoint, check_fp_feasible, check_qcqp_feasible,
                         convexity_threshold, map_forward, map_inverse, ellipsoid_psd_check)
from .oracle import MilpInstance, enumeration_size, solve_milp_exact
from .poly import Dataset, basis_size, design_matrix, enumerate_basis
from .relaxation import (build_sdc_certificate, check_linear_relaxation_feasible,
                         soc_constraint_residuals, solve_linear_relaxation)
from .tscrr import TscrrConfig, fit_tscrr


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    checked: int
    worst: float
    detail: str = ""


@dataclass(frozen=True)
class SmallInstance:
    data: Dataset
    d: int
    l_m: int
    l_b: int

    @property
    def design(self) -> np.ndarray:
        return design_matrix(self.data.X, enumerate_basis(self.data.n, self.d))

    def milp(self) -> MilpInstance:
        return MilpInstance(self.design, self.data.y, self.l_m, self.l_b)


def random_instance(rng: np.random.Generator, max_nodes: int = 1500,
                    full: bool = False) -> SmallInstance:
    """Desk-scale instance: n <= 3, d <= 2, N <= 10, at most 10 monomials.

    ``full=True`` keeps every monomial and every point.
    """
    while True:
        n = int(rng.integers(1, 4))
        d = int(rng.integers(1, 3))
        N = int(rng.integers(3, 11))
        m = basis_size(n, d)
        X = rng.uniform(0.0, 1.0, size=(N, n))
        coef = rng.normal(0.0, 1.0, m) * (rng.uniform(size=m) < 0.5)
        y = design_matrix(X, enumerate_basis(n, d)) @ coef + rng.normal(0.0, 0.05, N)
        n_out = int(rng.integers(0, 3))
        y[rng.choice(N, n_out, replace=False)] += rng.uniform(2.0, 4.0, n_out)
        if full:
            l_m, l_b = m, N
        else:
            l_m = int(rng.integers(1, m + 1))
            l_b = int(rng.integers(max(1, ceil(N / 2)), N + 1))
        inst = SmallInstance(Dataset(X, y), d, l_m, l_b)
        if full or enumeration_size(inst.milp()) <= max_nodes:
            return inst


def random_qcqp_point(rng: np.random.Generator, inst: MilpInstance) -> QcqpPoint:
    """Feasible point of the binary QCQP: random support and kept rows."""
    s = np.zeros(inst.m)
    s[rng.choice(inst.m, inst.l_m, replace=False)] = 1.0
    b = np.zeros(inst.N)
    b[rng.choice(inst.N, inst.l_b, replace=False)] = 1.0
    c = s * rng.uniform(-2.0, 2.0, inst.m)
    resid = np.abs(inst.y - inst.design @ c)
    gamma = float(np.max(resid[b == 1])) + float(rng.uniform(0.0, 0.5))
    return QcqpPoint(c, s, b, gamma)


# -- individual properties -------------------------------------------------------

def check_basis_counts(rng) -> PropertyResult:
    got = (len(enumerate_basis(3, 4)), len(enumerate_basis(53, 2)))
    return PropertyResult("basis-counts", got == (35, 1485), 2, 0.0, f"sizes={got}")


def check_bijection(rng, points: int = 2000) -> PropertyResult:
    worst = 0.0
    for rho in (2.0, 10.0, 1e3):
        for _ in range(points):
            m, N = int(rng.integers(1, 8)), int(rng.integers(1, 8))
            p = QcqpPoint(rng.normal(0, 3, m), rng.uniform(0, 1, m), rng.uniform(0, 1, N),
                          rng.uniform(0, 5))
            back = map_inverse(map_forward(p, rho), rho)
            err = max(np.max(np.abs(back.c - p.c)), np.max(np.abs(back.s - p.s)),
                      np.max(np.abs(back.b - p.b)), abs(back.gamma - p.gamma))
            worst = max(worst, float(err))
    return PropertyResult("mapping-bijection", worst <= 1e-10, 3 * points, worst)


def check_convexity(rng, trials: int = 50) -> PropertyResult:
    worst_above, ok = np.inf, True
    for _ in range(trials):
        m = int(rng.integers(1, 40))
        N = int(rng.integers(1, 61 - m))
        above = ellipsoid_psd_check(m, N, convexity_threshold(m, N))
        below = ellipsoid_psd_check(m, N, 1.0 + 0.4 * sqrt(m + N))
        worst_above = min(worst_above, above.min_eigenvalue)
        ok &= above.min_eigenvalue >= -1e-9 and below.min_eigenvalue < 0
    return PropertyResult("ellipsoid-convexity", bool(ok), trials, float(worst_above))


def check_reformulation(rng, points: int = 100) -> PropertyResult:
    worst, obj_err, n = 0.0, 0.0, 0
    while n < points:
        inst = random_instance(rng).milp()
        fp = FpModel.from_instance(inst)
        for _ in range(5):
            p = random_qcqp_point(rng, inst)
            q = map_forward(p, fp.rho)
            back = map_inverse(q, fp.rho)
            worst = max(worst, check_qcqp_feasible(inst, p).worst,
                        check_fp_feasible(fp, q).worst, check_qcqp_feasible(inst, back).worst)
            obj_err = max(obj_err, abs(q.objective - p.gamma))
            n += 1
    return PropertyResult("reformulation-feasibility", worst <= 1e-8 and obj_err <= 1e-10,
                          n, worst, f"objective_error={obj_err:.1e}")


def check_sandwich(rng, instances: int = 50) -> PropertyResult:
    worst = -np.inf
    for _ in range(instances):
        inst = random_instance(rng)
        milp = solve_milp_exact(inst.milp())
        res = fit_tscrr(inst.data, TscrrConfig(inst.d, inst.l_m, inst.l_b))
        worst = max(worst, res.lower_bound - milp.gamma, milp.gamma - res.recovery_gamma)
    return PropertyResult("bound-sandwich", worst <= 1e-7, instances, float(worst))


def _relaxation_points(rng, count: int):
    """Relaxation optima plus images of binary points and convex mixtures of both."""
    out = []
    while len(out) < count:
        inst = random_instance(rng)
        fp = FpModel.build(inst.design, inst.data.y, inst.l_m, inst.l_b)
        sol = solve_linear_relaxation(fp).point
        img = map_forward(random_qcqp_point(rng, inst.milp()), fp.rho)
        t = float(rng.uniform())
        mix = type(img)(t * sol.c_hat + (1 - t) * img.c_hat, t * sol.s_hat + (1 - t) * img.s_hat,
                        t * sol.b_hat + (1 - t) * img.b_hat,
                        t * sol.gamma_hat + (1 - t) * img.gamma_hat, sol.v_hat)
        out += [(fp, sol), (fp, img), (fp, mix)]
    return out[:count]


def check_certificates(rng, points: int = 200) -> PropertyResult:
    worst_trace, worst_eig, worst_soc, ok = np.inf, np.inf, np.inf, True
    for fp, q in _relaxation_points(rng, points):
        ok &= check_linear_relaxation_feasible(fp, q).feasible
        cert = build_sdc_certificate(q, fp)
        soc = soc_constraint_residuals(q, cert.chi)
        worst_trace = min(worst_trace, cert.trace)
        worst_eig = min(worst_eig, cert.min_eigenvalue)
        worst_soc = min(worst_soc, soc.worst)
    ok &= worst_trace >= 1 - 1e-9 and worst_eig >= -1e-9 and worst_soc >= -1e-9
    return PropertyResult("sdc-soc-certificates", bool(ok), points, float(worst_eig),
                          f"min_trace={worst_trace:.9f} min_soc={worst_soc:.1e}")


def check_exactness(rng, instances: int = 20) -> PropertyResult:
    certified, worst = 0, 0.0
    for i in range(instances):
        inst = random_instance(rng, full=(i % 2 == 0))
        res = fit_tscrr(inst.data, TscrrConfig(inst.d, inst.l_m, inst.l_b))
        if res.relaxation.exactness.certified:
            certified += 1
            worst = max(worst, abs(res.recovery_gamma - solve_milp_exact(inst.milp()).gamma))
    return PropertyResult("exactness-consistency", certified > 0 and worst <= 1e-7,
                          instances, worst, f"certified={certified}")


SUITE: dict[str, Callable] = {
    "basis-counts": check_basis_counts,
    "mapping-bijection": check_bijection,
    "ellipsoid-convexity": check_convexity,
    "reformulation-feasibility": check_reformulation,
    "bound-sandwich": check_sandwich,
    "sdc-soc-certificates": check_certificates,
    "exactness-consistency": check_exactness,
}


def run_suite(seed: int = 0, only=None) -> list[PropertyResult]:
    """Run the properties in a fixed order, each from its own derived stream."""
    out = []
    for k, (name, fn) in enumerate(SUITE.items()):
        if only and name not in only:
            continue
        out.append(fn(np.random.default_rng([seed, k])))
    return out
