"""Evaluation harness: ingestion, normalization, splits, metrics and reports."""
from __future__ import annotations

import configparser
import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, SprmError
from .lp import solve_least_squares
from .poly import Dataset, design_matrix, enumerate_basis
from .tscrr import TscrrConfig, fit_tscrr

log = logging.getLogger(__name__)

SPLIT_NAMES = {"odd-even": "interpolation", "head-tail": "extrapolation"}
MODELS = ("tscrr", "linear", "polynomial")
CSV_COLUMNS = ("dataset", "model", "split", "r2", "mse", "sse", "gamma", "lower_bound",
               "gap", "anomaly_count")


@dataclass(frozen=True)
class SplitSpec:
    kind: str
    fraction: float = 0.97

    def __post_init__(self):
        if self.kind not in SPLIT_NAMES:
            raise ValueError(f"unknown split kind {self.kind!r}")
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("fraction must lie strictly between 0 and 1")

    @property
    def name(self) -> str:
        return SPLIT_NAMES[self.kind]


@dataclass(frozen=True)
class Metrics:
    r2: Optional[float]
    mse: float
    sse: float
    count: int


def ingest_csv(path, target: str, features: Sequence[str]) -> Dataset:
    """Read numeric columns from a headed CSV, dropping unusable rows."""
    features = tuple(features)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        cols = []
        for name in (*features, target):
            if name not in header:
                raise DataError(f"{path}: missing column {name!r}")
            cols.append(header.index(name))
        rows, dropped = [], 0
        for rec in reader:
            try:
                vals = [float(rec[j]) for j in cols]
            except (ValueError, IndexError):
                dropped += 1
                continue
            if not all(math.isfinite(v) for v in vals):
                dropped += 1
                continue
            rows.append(vals)
    if dropped:
        log.warning("%s: dropped %d unusable rows", path, dropped)
    if not rows:
        raise DataError(f"{path}: no usable rows")
    arr = np.array(rows)
    return Dataset(arr[:, :-1], arr[:, -1], features, target, dropped_rows=dropped)


def _minmax(col: np.ndarray, train) -> tuple[float, float]:
    vals = col[train]
    return float(vals.min()), float(vals.max())


def _scale(col: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi == lo:
        return np.full(col.shape, 0.5)
    return (col - lo) / (hi - lo)


def normalize(data: Dataset, train_rows: Sequence[int]) -> Dataset:
    """Min-max scale features and target with statistics of the train rows only."""
    train = np.asarray(list(train_rows), dtype=int)
    if train.size == 0:
        raise ValueError("train rows must be non-empty")
    fr = tuple(_minmax(data.X[:, j], train) for j in range(data.n))
    tr = _minmax(data.y, train)
    X = np.column_stack([_scale(data.X[:, j], *fr[j]) for j in range(data.n)])
    return Dataset(X, _scale(data.y, *tr), data.feature_names, data.target_name, fr, tr,
                   data.dropped_rows)


def split(data: Dataset, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """0-based (train, test) row indices."""
    N = data.N
    if N < 2:
        raise ValueError("need at least 2 rows to split")
    idx = np.arange(N)
    if spec.kind == "odd-even":
        # odd 1-based positions are even 0-based ones
        return idx[0::2], idx[1::2]
    head = min(max(int(math.floor(spec.fraction * N)), 1), N - 1)
    return idx[:head], idx[head:]


def compute_metrics(y_true, y_pred) -> Metrics:
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.size} vs {y_pred.size}")
    if y_true.size == 0:
        raise ValueError("need at least one value")
    count = y_true.size
    mse = float(np.mean((y_true - y_pred) ** 2))
    # defined from mse so the identity sse = mse * count holds bit for bit
    sse = mse * count
    spread = float(np.sum((y_true - y_true.mean()) ** 2))
    if spread > 0:
        r2 = 1.0 - float(np.sum((y_true - y_pred) ** 2)) / spread
    else:
        r2 = 1.0 if sse == 0 else None
    return Metrics(r2, mse, sse, count)


def _ls_predict(data: Dataset, degree: int, train, test) -> np.ndarray:
    basis = enumerate_basis(data.n, degree)
    coef = solve_least_squares(design_matrix(data.X[train], basis), data.y[train])
    return design_matrix(data.X[test], basis) @ coef


def run_baselines(data: Dataset, train, test, degree: int) -> dict[str, Metrics]:
    """Least squares on the degree-1 and on the full degree-``degree`` basis."""
    return {
        "linear": compute_metrics(data.y[test], _ls_predict(data, 1, train, test)),
        "polynomial": compute_metrics(data.y[test], _ls_predict(data, degree, train, test)),
    }


# -- benchmark driver -----------------------------------------------------------

@dataclass(frozen=True)
class DatasetConfig:
    name: str
    path: str
    target: str
    features: tuple[str, ...]
    degree: int
    l_m: int
    l_b: Optional[int]
    anomalies: Optional[int]
    splits: tuple[SplitSpec, ...]
    M: float = 1e3
    rho: Optional[float] = None

    def l_b_for(self, n_train: int) -> int:
        if self.l_b is not None:
            return min(self.l_b, n_train)
        return max(n_train - self.anomalies, 1)


def load_config(path) -> list[DatasetConfig]:
    """Parse an INI file with one section per dataset.

    Keys: ``path`` (relative paths resolve against the config file),
    ``target``, ``features`` (comma separated), ``degree``, ``lm``, one of
    ``lb`` / ``anomalies``, ``splits`` (comma separated kinds), optional
    ``fraction``, ``big_m`` and ``rho``.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if not cp.read(path):
        raise DataError(f"cannot read config {path}")
    base = os.path.dirname(os.path.abspath(path))
    out = []
    for name in cp.sections():
        sec = cp[name]
        try:
            if ("lb" in sec) == ("anomalies" in sec):
                raise DataError(f"[{name}] needs exactly one of lb, anomalies")
            fraction = sec.getfloat("fraction", 0.97)
            splits = tuple(SplitSpec(k.strip(), fraction)
                           for k in sec.get("splits", "odd-even, head-tail").split(","))
            rho = sec.get("rho")
            out.append(DatasetConfig(
                name, os.path.join(base, sec["path"]), sec["target"].strip(),
                tuple(f.strip() for f in sec["features"].split(",")),
                sec.getint("degree"), sec.getint("lm"),
                sec.getint("lb") if "lb" in sec else None,
                sec.getint("anomalies") if "anomalies" in sec else None,
                splits, sec.getfloat("big_m", 1e3), float(rho) if rho else None))
        except (KeyError, ValueError, TypeError) as exc:
            raise DataError(f"[{name}] invalid entry: {exc}") from exc
    if not out:
        raise DataError(f"config {path} lists no datasets")
    return out


def _row(dataset, model, split_name, m: Metrics, gamma=None, lower=None, gap=None,
         anomaly_count=None) -> dict:
    return {"dataset": dataset, "model": model, "split": split_name, "r2": m.r2,
            "mse": m.mse, "sse": m.sse, "gamma": gamma, "lower_bound": lower, "gap": gap,
            "anomaly_count": anomaly_count, "test_count": m.count}


def run_dataset(cfg: DatasetConfig) -> dict:
    """Every (split, model) combination for one dataset; never raises."""
    try:
        raw = ingest_csv(cfg.path, cfg.target, cfg.features)
        rows, runs = [], []
        for spec in cfg.splits:
            train, test = split(raw, spec)
            data = normalize(raw, train)
            tcfg = TscrrConfig(cfg.degree, cfg.l_m, cfg.l_b_for(train.size), cfg.M, cfg.rho)
            res = fit_tscrr(data.subset(train), tcfg)
            pred = res.model.predict_many(data.X[test])
            rows.append(_row(cfg.name, "tscrr", spec.name,
                             compute_metrics(data.y[test], pred), res.recovery_gamma,
                             res.lower_bound, res.gap, len(res.model.anomalies)))
            for model, m in run_baselines(data, train, test, cfg.degree).items():
                rows.append(_row(cfg.name, model, spec.name, m))
            runs.append({
                "split": spec.name,
                "train_count": int(train.size),
                "test_count": int(test.size),
                "selected": res.model.labels(),
                "anomalies": [int(train[k]) for k in res.model.anomalies],
                "gamma": res.recovery_gamma,
                "lower_bound": res.lower_bound,
                "gap": res.gap,
                "certified": res.relaxation.exactness.certified,
                "integrality_gap": res.relaxation.exactness.integrality_gap,
            })
        return {"name": cfg.name, "rows": rows, "runs": runs, "dropped_rows": raw.dropped_rows}
    except (SprmError, ValueError, OSError) as exc:
        log.error("dataset %s failed: %s", cfg.name, exc)
        return {"name": cfg.name, "rows": [], "error": f"{type(exc).__name__}: {exc}"}


def _order_key(row):
    return (MODELS.index(row["model"]), list(SPLIT_NAMES.values()).index(row["split"]))


def _fmt(v) -> str:
    if v is None:
        return "nan"
    return repr(float(v)) if isinstance(v, float) else str(v)


def run_benchmark(config_path, out_dir, jobs: Optional[int] = None) -> dict:
    """Run every dataset in the config and write ``metrics.csv`` and ``summary.json``."""
    configs = load_config(config_path)
    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(min(jobs, len(configs))) as pool:
            results = list(pool.map(run_dataset, configs))
    else:
        results = [run_dataset(c) for c in configs]
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "metrics.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for res in results:
            for row in sorted(res["rows"], key=_order_key):
                w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    summary = {"datasets": [
        {k: v for k, v in res.items() if k != "rows"} | {
            "metrics": sorted(res["rows"], key=_order_key)}
        for res in results]}
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
