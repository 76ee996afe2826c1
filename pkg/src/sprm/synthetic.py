"""Generators for the bundled synthetic datasets.

Both generators are deterministic given their seed; the CSV copies shipped in
``sprm/data`` are produced by ``scripts/generate_data.py`` and a test checks
they still match.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .poly import Dataset

OUTLIER_SEED = 20
SERIES_SEED = 720


@dataclass(frozen=True)
class SyntheticSet:
    data: Dataset
    anomalies: tuple[int, ...]


def outlier_truth(X: np.ndarray) -> np.ndarray:
    return 1.0 + 2.0 * X[:, 0] - X[:, 1] ** 2


def outlier_synthetic(seed: int = OUTLIER_SEED) -> SyntheticSet:
    """20 points of ``1 + 2 x1 - x2^2`` with two gross outliers.

    Each coordinate attains exactly 0 and 1, so min-max scaling of the
    features is the identity and the exponent structure survives it.
    """
    rng = np.random.default_rng(seed)
    X = np.round(rng.uniform(0.0, 1.0, size=(20, 2)), 3)
    X[0] = (0.0, 1.0)
    X[1] = (1.0, 0.0)
    y = outlier_truth(X)
    anomalies = (6, 13)
    y[6] += 4.0
    y[13] -= 3.0
    return SyntheticSet(Dataset(X, y, ("x1", "x2"), "y"), anomalies)


def series_truth(X: np.ndarray) -> np.ndarray:
    return 0.3 + 0.4 * X[:, 1] + 0.8 * X[:, 0] * X[:, 1] - 0.5 * X[:, 2] ** 2


def series_synthetic(seed: int = SERIES_SEED, n_rows: int = 720,
                     n_anomalies: int = 24) -> SyntheticSet:
    """Hourly series: daily and weekly cycles plus a trend, with spikes.

    The target is a sparse degree-2 polynomial of the three features plus
    small noise. Spikes land only in the first 97% of rows.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(n_rows, dtype=float)
    X = np.column_stack([
        0.5 + 0.5 * np.sin(2 * np.pi * t / 24.0),
        0.5 + 0.4 * np.sin(2 * np.pi * t / 168.0 + 0.7),
        t / (n_rows - 1),
    ])
    y = series_truth(X) + rng.normal(0.0, 0.01, n_rows)
    head = int(np.floor(0.97 * n_rows))
    anomalies = tuple(sorted(int(k) for k in rng.choice(head, n_anomalies, replace=False)))
    y[list(anomalies)] += rng.uniform(1.0, 2.0, n_anomalies)
    return SyntheticSet(Dataset(X, y, ("daily", "weekly", "trend"), "load"), anomalies)


def write_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*data.feature_names, data.target_name])
        for x, y in zip(data.X, data.y):
            w.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def bundled_path(name: str) -> str:
    """Filesystem path of a CSV in the package data directory."""
    return str(resources.files("sprm") / "data" / name)


BUNDLED = {
    "outliers": ("outliers.csv", ("x1", "x2"), "y"),
    "series": ("series.csv", ("daily", "weekly", "trend"), "load"),
}
