"""Model-vs-baseline benchmark harness and the fixed-variance baseline.

Each (dataset, model) cell owns a seed derived from the master seed and the
cell's names, so adding a dataset or reordering the grid never changes
existing results.  Cell failures are recorded in the report instead of
aborting the run.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .metrics import LjungBoxResult, MetricsReport, evaluate, ljung_box
from .model import (
    ModelConfig,
    TrainedModel,
    derive_seed,
    fit_scaling,
    train,
    walk_forecast,
)
from .series import DataError, TimeSeries, clean_series, train_test_split

__all__ = [
    "ModelSpec",
    "CellResult",
    "BenchmarkReport",
    "fixed_variance_baseline",
    "score_predictions",
    "load_prediction_csv",
    "benchmark",
]

METRIC_NAMES = ("mse", "rmse", "mae", "mape", "r2")


def fixed_variance_baseline(series: TimeSeries, config: ModelConfig) -> TrainedModel:
    """Train the ablation baseline: same pipeline, constant variance track.

    The static variance is the sample variance of the normalized training
    series; only the rule coefficients are optimized.  The resulting model
    carries the equivalent degenerate GARCH parameters (omega = s^2,
    alpha1 = beta1 = 0) so the standard forecasting path reproduces the
    static track.
    """
    z, _ = fit_scaling(series)
    s2 = float(np.var(z, ddof=1)) if len(z) > 1 else 0.0
    return train(series, config, static_variance=s2)


@dataclass(frozen=True)
class ModelSpec:
    """One column of the benchmark grid."""

    name: str
    kind: str  # "garch" | "fixed" | "external"
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("garch", "fixed", "external"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "external" and not self.path:
            raise ValueError("external model spec needs a prediction CSV path")

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        text = text.strip()
        if text in ("garch", "fixed"):
            return cls(name=text, kind=text)
        if text.startswith("external:"):
            path = text.split(":", 1)[1]
            return cls(name=Path(path).stem, kind="external", path=path)
        raise ValueError(
            f"unknown model spec {text!r}; expected 'garch', 'fixed', or 'external:<csv>'"
        )


@dataclass
class CellResult:
    dataset: str
    model: str
    seed: int
    metrics: MetricsReport | None = None
    ljung_box: LjungBoxResult | None = None
    trace: tuple = ()
    n_origins: int = 0
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "model": self.model,
            "seed": self.seed,
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "ljung_box": self.ljung_box.to_dict() if self.ljung_box else None,
            "trace": [[int(i), float(e)] for i, e in self.trace],
            "n_origins": self.n_origins,
            "error": self.error,
        }


@dataclass
class BenchmarkReport:
    datasets: tuple
    models: tuple
    master_seed: int
    config: dict
    cells: dict = field(default_factory=dict)

    def cell(self, dataset: str, model: str) -> CellResult:
        return self.cells[(dataset, model)]

    @property
    def all_failed(self) -> bool:
        return all(c.error is not None for c in self.cells.values())

    def to_dict(self) -> dict:
        return {
            "schema": "it2garch.benchmark/1",
            "datasets": list(self.datasets),
            "models": list(self.models),
            "master_seed": self.master_seed,
            "config": self.config,
            "cells": [self.cells[(d, m)].to_dict()
                      for d in self.datasets for m in self.models],
        }

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")

    def write_metric_grids(self, out_dir) -> list:
        """One CSV per metric: rows = datasets, columns = models."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for metric in METRIC_NAMES:
            path = out_dir / f"grid_{metric}.csv"
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["dataset", *self.models])
                for ds in self.datasets:
                    row = [ds]
                    for m in self.models:
                        cell = self.cells[(ds, m)]
                        row.append(
                            "" if cell.metrics is None
                            else repr(getattr(cell.metrics, metric))
                        )
                    writer.writerow(row)
            written.append(path)
        return written

    def write_traces(self, out_dir) -> list:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for (ds, m), cell in self.cells.items():
            if not cell.trace:
                continue
            path = out_dir / f"{ds}__{m}.csv"
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["origin_index", "representative_error"])
                for origin, err in cell.trace:
                    writer.writerow([origin, repr(err)])
            written.append(path)
        return written


def load_prediction_csv(path) -> tuple:
    """Two-column (actual, predicted) CSV for scoring external model output."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such prediction file: {path}")
    actual = []
    predicted = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        cols = [c.strip().lower() for c in header]
        try:
            ai = cols.index("actual")
            pi = cols.index("predicted")
        except ValueError:
            ai, pi = 0, 1
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                actual.append(float(row[ai]))
                predicted.append(float(row[pi]))
            except (ValueError, IndexError):
                raise DataError(f"{path}: unparseable row {rownum}: {row!r}") from None
    if not actual:
        raise DataError(f"{path}: zero parseable rows")
    return np.asarray(actual), np.asarray(predicted)


def score_predictions(actual, predicted, lags: int = 10) -> tuple:
    """Metrics, Ljung-Box on residuals, and a per-sample squared-error trace."""
    actual = np.asarray(actual, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    report = evaluate(actual, predicted)
    residuals = actual - predicted
    lb = None
    if residuals.size > max(lags, 1):
        try:
            lb = ljung_box(residuals, lags)
        except ValueError:
            lb = None
    trace = tuple((i, float(e * e)) for i, e in enumerate(residuals))
    return report, lb, trace


def _run_builtin_cell(series: TimeSeries, spec: ModelSpec, config: ModelConfig,
                      train_fraction: float, lags: int,
                      outlier_k: float, neighborhood: int) -> CellResult:
    cell = CellResult(dataset=series.name, model=spec.name, seed=config.seed)
    w = config.window
    steps = config.steps
    cleaned = clean_series(series, outlier_k, neighborhood)
    train_part, test_part = train_test_split(cleaned, train_fraction)
    if len(train_part) < w + 2:
        raise DataError(
            f"dataset {series.name!r}: training split too short "
            f"({len(train_part)} points for window {w})"
        )
    if len(test_part) < steps:
        raise DataError(
            f"dataset {series.name!r}: test split shorter than horizon {steps}"
        )
    if spec.kind == "fixed":
        model = fixed_variance_baseline(train_part, config)
    else:
        model = train(train_part, config)

    n = len(cleaned)
    cut = len(train_part)
    origins = range(cut - 1, n - steps)
    walk = walk_forecast(model, cleaned, steps=steps, origins=origins)

    raw = np.asarray(cleaned.values, dtype=np.float64)
    span = model.scaling.span
    lo = model.scaling.min
    actual_all = []
    pred_all = []
    res_one_step = []
    trace = []
    for origin, result in zip(walk.origins, walk.results):
        preds = np.asarray(result.points) * span + lo
        actuals = raw[origin + 1 : origin + 1 + steps]
        actual_all.extend(actuals)
        pred_all.extend(preds)
        res_one_step.append(actuals[0] - preds[0])
        err = actuals - preds
        trace.append((origin, float(np.mean(err * err))))

    cell.metrics = evaluate(actual_all, pred_all)
    res = np.asarray(res_one_step)
    cell.ljung_box = None
    if res.size > max(lags, 1):
        try:
            cell.ljung_box = ljung_box(res, lags)
        except ValueError:
            pass
    cell.trace = tuple(trace)
    cell.n_origins = len(walk.origins)
    return cell


def benchmark(datasets, models, config: ModelConfig, train_fraction: float = 0.8,
              lags: int = 10, outlier_k: float = 3.0,
              neighborhood: int = 1) -> BenchmarkReport:
    """Run every (dataset, model) cell and collect metrics, tests, and traces.

    ``datasets`` is a sequence of :class:`TimeSeries`; ``models`` a sequence
    of :class:`ModelSpec` (or parseable spec strings).  Per-cell seeds derive
    from ``config.seed`` and the cell names; per-cell failures are recorded,
    not raised.
    """
    specs = [m if isinstance(m, ModelSpec) else ModelSpec.parse(m) for m in models]
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate model names in {names}")
    ds_names = [d.name for d in datasets]
    if len(set(ds_names)) != len(ds_names):
        raise ValueError(f"duplicate dataset names in {ds_names}")

    report = BenchmarkReport(
        datasets=tuple(ds_names),
        models=tuple(names),
        master_seed=config.seed,
        config={
            **config.to_dict(),
            "train_fraction": train_fraction,
            "lags": lags,
            "outlier_k": outlier_k,
            "neighborhood": neighborhood,
        },
    )
    for series in datasets:
        for spec in specs:
            seed = derive_seed(config.seed, "cell", series.name, spec.name)
            cell = CellResult(dataset=series.name, model=spec.name, seed=seed)
            try:
                if spec.kind == "external":
                    actual, predicted = load_prediction_csv(spec.path)
                    cell.metrics, cell.ljung_box, cell.trace = score_predictions(
                        actual, predicted, lags)
                    cell.n_origins = len(cell.trace)
                else:
                    cell = _run_builtin_cell(
                        series, spec, replace(config, seed=seed),
                        train_fraction, lags, outlier_k, neighborhood)
                    cell.seed = seed
            except (DataError, ValueError, ArithmeticError) as exc:
                cell.error = f"{type(exc).__name__}: {exc}"
            report.cells[(series.name, spec.name)] = cell
    return report
