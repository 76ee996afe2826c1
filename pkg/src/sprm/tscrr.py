"""Two-step fit: relaxation for structure, then a minimax LP for coefficients."""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError
from .fractional import FpModel, convexity_threshold, default_rho, map_inverse
from .lp import chebyshev_fit
from .oracle import DEFAULT_BIG_M
from .poly import Dataset, MonomialBasis, SparseModel, design_matrix, enumerate_basis
from .relaxation import (CUT_LIMIT, INTEGRALITY_TOL, RelaxationSolution,
                         solve_linear_relaxation)

FORMAT_TAG = "sprm-model"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class TscrrConfig:
    d: int
    l_m: int
    l_b: int
    M: float = DEFAULT_BIG_M
    rho: Optional[float] = None
    recovery_scope: str = "kept-only"
    recovery: str = "rounded"
    integrality_tol: float = INTEGRALITY_TOL
    cut_limit: int = CUT_LIMIT

    def __post_init__(self):
        if self.recovery_scope not in ("kept-only", "all-points"):
            raise ValueError(f"unknown recovery scope {self.recovery_scope!r}")
        if self.recovery not in ("rounded", "fractional"):
            raise ValueError(f"unknown recovery mode {self.recovery!r}")
        if self.d < 0 or self.l_m < 1 or self.l_b < 1:
            raise ValueError("need d >= 0, l_m >= 1 and l_b >= 1")

    def validate(self, m_d: int, N: int) -> float:
        """Check counts against the problem size and return the rho to use."""
        if self.l_m > m_d:
            raise ValueError(f"l_m={self.l_m} exceeds the {m_d} candidate monomials")
        if self.l_b > N:
            raise ValueError(f"l_b={self.l_b} exceeds N={N}")
        rho = default_rho(m_d, N) if self.rho is None else float(self.rho)
        if rho < convexity_threshold(m_d, N) - 1e-12:
            raise ValueError(f"rho={rho} is below {convexity_threshold(m_d, N):.6g}")
        return rho


@dataclass(frozen=True)
class TscrrResult:
    model: SparseModel
    relaxation: RelaxationSolution
    s_star: np.ndarray
    b_star: np.ndarray
    gamma_star: float
    s_rounded: np.ndarray
    b_rounded: np.ndarray
    recovery_gamma: float
    lower_bound: float
    gap: float
    recovery_scope: str = "kept-only"


def top_k(values: np.ndarray, k: int) -> np.ndarray:
    """0/1 vector marking the ``k`` largest entries; ties go to the lower index."""
    order = np.argsort(-np.asarray(values, dtype=float), kind="stable")
    out = np.zeros(len(values), dtype=int)
    out[order[:k]] = 1
    return out


def fit_tscrr(data: Dataset, cfg: TscrrConfig) -> TscrrResult:
    basis = enumerate_basis(data.n, cfg.d)
    D = design_matrix(data.X, basis)
    rho = cfg.validate(len(basis), data.N)
    fp = FpModel.build(D, data.y, cfg.l_m, cfg.l_b, cfg.M, rho)
    relax = solve_linear_relaxation(fp, cut_limit=cfg.cut_limit,
                                    integrality_tol=cfg.integrality_tol)
    rec = map_inverse(relax.point, rho)
    s_round = top_k(rec.s, cfg.l_m)
    b_round = top_k(rec.b, cfg.l_b)
    keep = (np.flatnonzero(b_round) if cfg.recovery_scope == "kept-only"
            else np.arange(data.N))

    if cfg.recovery == "rounded":
        selected = tuple(int(j) for j in np.flatnonzero(s_round))
        coef, gamma = chebyshev_fit(D[:, list(selected)], data.y, keep)
    else:
        # multipliers taken straight from the relaxation, no rounding of the support
        weights = np.clip(rec.s, 0.0, None)
        selected = tuple(int(j) for j in np.flatnonzero(weights > cfg.integrality_tol))
        if not selected:
            selected = tuple(int(j) for j in np.flatnonzero(s_round))
            weights = s_round.astype(float)
        w = weights[list(selected)]
        raw, gamma = chebyshev_fit(D[:, list(selected)] * w, data.y, keep)
        coef = raw * w

    anomalies = tuple(int(k) for k in np.flatnonzero(b_round == 0))
    model = SparseModel(basis, selected, coef, gamma, anomalies, data.feature_ranges,
                        data.target_range, data.feature_names)
    return TscrrResult(model, relax, rec.s, rec.b, rec.gamma, s_round, b_round, gamma,
                       relax.objective, gamma - relax.objective, cfg.recovery_scope)


@dataclass(frozen=True)
class ResidualProfile:
    residuals: np.ndarray
    kept: np.ndarray

    @property
    def max_kept(self) -> float:
        return float(np.max(self.residuals[self.kept], initial=0.0))


def residual_profile(result: TscrrResult, data: Dataset) -> ResidualProfile:
    """Absolute residual of every point and whether it was kept."""
    if data.n != result.model.basis.n:
        raise DataError(f"model has {result.model.basis.n} features, data has {data.n}")
    r = np.abs(data.y - result.model.predict_many(data.X))
    kept = np.ones(data.N, dtype=bool)
    kept[list(result.model.anomalies)] = False
    return ResidualProfile(r, kept)


# -- plain-text model files --------------------------------------------------

def _pair(p) -> str:
    return "none" if p is None else f"{float(p[0])!r} {float(p[1])!r}"


def dumps_model(model: SparseModel) -> str:
    lines = [f"{FORMAT_TAG} {FORMAT_VERSION}",
             f"n {model.basis.n}",
             f"d {model.basis.d}",
             "names " + " ".join(model.feature_names),
             f"target {_pair(model.target_range)}"]
    ranges = model.feature_ranges or [None] * model.basis.n
    lines += [f"range {_pair(r)}" for r in ranges]
    lines.append(f"gamma {model.gamma!r}")
    lines.append("anomalies " + " ".join(str(k) for k in model.anomalies))
    for j, c in zip(model.selected, model.coefficients):
        alpha = " ".join(str(a) for a in model.basis[j])
        lines.append(f"term {float(c)!r} {alpha}")
    return "\n".join(lines) + "\n"


def _parse_pair(tokens):
    if tokens == ["none"]:
        return None
    lo, hi = tokens
    return (float(lo), float(hi))


def loads_model(text: str) -> SparseModel:
    lines = text.splitlines()
    head = lines[0].split()
    if head[:1] != [FORMAT_TAG] or len(head) != 2:
        raise DataError("not a model file")
    if int(head[1]) != FORMAT_VERSION:
        raise DataError(f"unsupported model version {head[1]}")
    fields: dict[str, list] = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        key, *rest = line.split()
        fields.setdefault(key, []).append(rest)
    n = int(fields["n"][0][0])
    d = int(fields["d"][0][0])
    basis = enumerate_basis(n, d)
    ranges = [_parse_pair(r) for r in fields.get("range", [])]
    feature_ranges = None if all(r is None for r in ranges) else tuple(ranges)
    selected, coef = [], []
    for t in fields["term"]:
        coef.append(float(t[0]))
        selected.append(basis.position(tuple(int(a) for a in t[1:])))
    return SparseModel(
        basis, tuple(selected), np.array(coef), float(fields["gamma"][0][0]),
        tuple(int(k) for k in fields["anomalies"][0]), feature_ranges,
        _parse_pair(fields["target"][0]), tuple(fields["names"][0]))


def save_model(model: SparseModel, path) -> None:
    with open(os.fspath(path), "w") as fh:
        fh.write(dumps_model(model))


def load_model(path) -> SparseModel:
    with open(os.fspath(path)) as fh:
        return loads_model(fh.read())
