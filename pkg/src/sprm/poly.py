"""Monomial bases, polynomial evaluation and the dataset/model containers.

Every vector indexed by monomials (coefficients, selection indicators) uses
the canonical order produced by :func:`enumerate_basis`: total degree
ascending, ties broken by ascending lexicographic order of the exponent
tuples. For ``n=2, d=2`` that is ``1, x2, x1, x2^2, x1 x2, x1^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import CapacityError, DimensionError

MultiIndex = tuple[int, ...]

DEFAULT_BASIS_LIMIT = 10**6


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _compositions(n: int, total: int) -> Iterator[MultiIndex]:
    # lexicographically ascending tuples of n non-negative ints summing to total
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(n - 1, total - first):
            yield (first,) + rest


@dataclass(frozen=True)
class MonomialBasis:
    n: int
    d: int
    indices: tuple[MultiIndex, ...]

    def __len__(self) -> int:
        return len(self.indices)

    def __getitem__(self, j: int) -> MultiIndex:
        return self.indices[j]

    def __iter__(self):
        return iter(self.indices)

    def position(self, alpha: Sequence[int]) -> int:
        return self.indices.index(tuple(alpha))

    def label(self, j: int, names: Optional[Sequence[str]] = None) -> str:
        return monomial_label(self.indices[j], names)


def monomial_label(alpha: MultiIndex, names: Optional[Sequence[str]] = None) -> str:
    """Human-readable form, e.g. ``(1, 0, 2) -> 'x1*x3^2'``."""
    if names is None:
        names = [f"x{i + 1}" for i in range(len(alpha))]
    parts = []
    for name, power in zip(names, alpha):
        if power == 1:
            parts.append(name)
        elif power > 1:
            parts.append(f"{name}^{power}")
    return "*".join(parts) if parts else "1"


def basis_size(n: int, d: int) -> int:
    return comb(n + d, d)


def enumerate_basis(n: int, d: int, limit: int = DEFAULT_BASIS_LIMIT) -> MonomialBasis:
    """All exponent vectors of total degree at most ``d`` in ``n`` variables."""
    if n < 1 or d < 0:
        raise ValueError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    size = basis_size(n, d)
    if size > limit:
        raise CapacityError(f"basis for n={n}, d={d} has {size} monomials (limit {limit})")
    indices = tuple(alpha for t in range(d + 1) for alpha in _compositions(n, t))
    return MonomialBasis(n=n, d=d, indices=indices)


def eval_monomial(x: Sequence[float], alpha: Sequence[int]) -> float:
    if len(x) != len(alpha):
        raise DimensionError(f"point has {len(x)} coordinates, exponent has {len(alpha)}")
    value = 1.0
    for xi, ai in zip(x, alpha):
        if ai:
            value *= float(xi) ** ai
    return value


def design_matrix(X, basis: MonomialBasis) -> np.ndarray:
    """Evaluate every basis monomial at every row of ``X`` (or a Dataset).

    Column ``j`` holds ``x^basis[j]``; ``0**0`` is taken as 1.
    """
    if isinstance(X, Dataset):
        X = X.X
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != basis.n:
        raise DimensionError(f"data has {X.shape[1]} features, basis expects {basis.n}")
    exps = np.array(basis.indices, dtype=int).reshape(len(basis), basis.n)
    out = np.ones((X.shape[0], len(basis)))
    for i in range(basis.n):
        col = X[:, i]
        # zero exponents leave the column at 1, so 0**0 == 1
        for j, p in enumerate(exps[:, i]):
            if p:
                out[:, j] *= col**p
    return out


@dataclass(frozen=True)
class Dataset:
    """Input/output pairs plus the min-max statistics used to produce them.

    ``feature_ranges`` and ``target_range`` hold ``(min, max)`` pairs from the
    training rows; they are ``None`` for data that was never normalized.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] = ()
    target_name: str = "y"
    feature_ranges: Optional[tuple[tuple[float, float], ...]] = None
    target_range: Optional[tuple[float, float]] = None
    dropped_rows: int = 0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise DimensionError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if y.shape[0] < 1:
            raise DimensionError("dataset needs at least one row")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        if not self.feature_names:
            names = tuple(f"x{i + 1}" for i in range(X.shape[1]))
            object.__setattr__(self, "feature_names", names)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def subset(self, rows: Sequence[int]) -> "Dataset":
        rows = list(rows)
        return Dataset(
            self.X[rows], self.y[rows], self.feature_names, self.target_name,
            self.feature_ranges, self.target_range,
        )


@dataclass(frozen=True)
class SparseModel:
    basis: MonomialBasis
    selected: tuple[int, ...]
    coefficients: np.ndarray
    gamma: float
    anomalies: tuple[int, ...] = ()
    feature_ranges: Optional[tuple[tuple[float, float], ...]] = None
    target_range: Optional[tuple[float, float]] = None
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float).ravel()
        if len(self.selected) < 1:
            raise ValueError("a model needs at least one selected monomial")
        if coef.shape[0] != len(self.selected):
            raise DimensionError(
                f"{len(self.selected)} selected monomials but {coef.shape[0]} coefficients")
        object.__setattr__(self, "coefficients", _frozen(coef))
        object.__setattr__(self, "selected", tuple(int(j) for j in self.selected))
        object.__setattr__(self, "anomalies", tuple(int(k) for k in self.anomalies))

    @property
    def monomials(self) -> list[MultiIndex]:
        return [self.basis[j] for j in self.selected]

    def labels(self) -> list[str]:
        names = self.feature_names or None
        return [self.basis.label(j, names) for j in self.selected]

    def predict_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.basis.n:
            raise DimensionError(f"model expects {self.basis.n} features, got {X.shape[1]}")
        sub = MonomialBasis(self.basis.n, self.basis.d, tuple(self.monomials))
        return design_matrix(X, sub) @ self.coefficients


def predict(model: SparseModel, x: Sequence[float]) -> float:
    """Value of the fitted polynomial at a single (normalized) point."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.basis.n:
        raise DimensionError(f"model expects {model.basis.n} features, got {x.shape[0]}")
    return float(sum(c * eval_monomial(x, alpha)
                     for c, alpha in zip(model.coefficients, model.monomials)))
