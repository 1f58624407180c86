"""Command-line interface: simulate | train | predict | benchmark | diagnose.

Runs are driven by a flat key = value config file with every option
overridable on the command line (flags win).  Each command writes the
effective configuration next to its outputs so any run can be reproduced.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from dataclasses import fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import kernels
from .benchmark import ModelSpec, benchmark
from .garch import GarchParams, simulate_garch
from .metrics import ljung_box
from .model import ModelConfig, TrainedModel, train, walk_forecast
from .series import DataError, clean_series, load_csv

__all__ = ["main", "entrypoint", "parse_config_file"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_config_file(path) -> dict:
    """Flat, typed key = value file; '#' starts a comment, commas make lists."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such config file: {path}")
    out: dict = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        value = value.strip()
        if "," in value:
            out[key] = [v.strip() for v in value.split(",") if v.strip()]
        else:
            out[key] = _coerce(value)
    return out


def _coerce(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _column(value):
    if value is None:
        return None
    if isinstance(value, int):
        return value
    text = str(value)
    return int(text) if text.lstrip("-").isdigit() else text


_MODEL_KEYS = {f.name for f in dataclass_fields(ModelConfig)}

_DEFAULTS = {
    **ModelConfig().to_dict(),
    "out_dir": "out",
    "value_column": 0,
    "timestamp_column": None,
    "train_fraction": 0.8,
    "lags": 10,
    "outlier_k": 3.0,
    "neighborhood": 1,
}


def _effective(args: argparse.Namespace) -> dict:
    """Defaults < config file < command-line flags."""
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        merged.update(parse_config_file(args.config))
    for key, value in vars(args).items():
        if key in ("command", "config", "func"):
            continue
        if value is not None:
            merged[key] = value
    return merged


def _model_config(eff: dict) -> ModelConfig:
    try:
        return ModelConfig(**{k: eff[k] for k in _MODEL_KEYS if k in eff})
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad model configuration: {exc}") from exc


def _write_run_config(out_dir: Path, eff: dict, command: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {"command": command, "kernel_backend": kernels.backend_name()}
    doc.update({k: v for k, v in sorted(eff.items()) if v is not None})
    (out_dir / "run_config.json").write_text(
        json.dumps(doc, sort_keys=True, indent=2, default=str) + "\n"
    )


def _load_dataset(path_spec: str, eff: dict):
    """Dataset spec 'path' or 'path:column'."""
    path, sep, column = str(path_spec).rpartition(":")
    if not sep:
        path, column = column, None
    col = _column(column) if column else _column(eff["value_column"])
    return load_csv(path, col, _column(eff.get("timestamp_column")))


def cmd_simulate(args) -> int:
    eff = _effective(args)
    for key in ("omega", "alpha", "beta"):
        if eff.get(key) is None:
            raise UsageError(f"simulate requires --{key}")
    n = int(eff.get("n") or 0)
    if n < 1:
        raise UsageError("simulate requires --n >= 1")
    try:
        params = GarchParams(float(eff["omega"]), float(eff["alpha"]), float(eff["beta"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    series = simulate_garch(params, float(eff.get("mean", 0.0)), n, int(eff["seed"]))

    out_dir = Path(eff["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = Path(eff.get("out") or out_dir / "simulated.csv")
    with out_path.open("w", newline="") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(series.values):
            fh.write(f"{i},{v!r}\n")
    _write_run_config(out_dir, eff, "simulate")

    xs = np.asarray(series.values)
    print(f"wrote {out_path} ({n} points)")
    print(f"sample mean     {xs.mean():.6f}")
    print(f"sample variance {xs.var(ddof=1):.6f}")
    return 0


def cmd_train(args) -> int:
    eff = _effective(args)
    if not eff.get("data"):
        raise UsageError("train requires --data <csv>")
    config = _model_config(eff)
    series = load_csv(eff["data"], _column(eff["value_column"]),
                      _column(eff.get("timestamp_column")))
    series = clean_series(series, float(eff["outlier_k"]), int(eff["neighborhood"]))

    model = train(series, config)

    out_dir = Path(eff["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    model_out = Path(eff.get("model_out") or out_dir / "model.json")
    model.save(model_out)
    rep = model.report
    report_doc = {
        "data": str(eff["data"]),
        "points": len(series),
        "rules": rep.rules,
        "initial_mse": rep.initial_mse,
        "final_mse": rep.final_mse,
        "accepted_moves": len(rep.accepted),
        "evaluations": rep.evaluations,
        "wall_time_s": rep.wall_time_s,
        "sigma_floor_hits": rep.diagnostics.sigma_floor_hits,
        "zero_firing_fallbacks": rep.diagnostics.zero_firing_fallbacks,
        "kernel_backend": kernels.backend_name(),
    }
    (out_dir / "training_report.json").write_text(
        json.dumps(report_doc, sort_keys=True, indent=2) + "\n")
    _write_run_config(out_dir, eff, "train")
    print(f"wrote {model_out}")
    print(f"rules {rep.rules}  training MSE {model.training_mse:.6g}  "
          f"accepted {len(rep.accepted)}/{config.iterations}  "
          f"wall {rep.wall_time_s:.2f}s")
    return 0


def cmd_predict(args) -> int:
    eff = _effective(args)
    for key in ("model", "data"):
        if not eff.get(key):
            raise UsageError(f"predict requires --{key}")
    try:
        model = TrainedModel.load(eff["model"])
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise DataError(f"cannot load model {eff['model']}: {exc}") from exc
    series = load_csv(eff["data"], _column(eff["value_column"]),
                      _column(eff.get("timestamp_column")))
    series = clean_series(series, float(eff["outlier_k"]), int(eff["neighborhood"]))
    steps = int(eff["steps"])

    walk = walk_forecast(model, series, steps=steps)
    span = model.scaling.span
    lo = model.scaling.min

    out_dir = Path(eff["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = Path(eff.get("out") or out_dir / "predictions.csv")
    with out_path.open("w", newline="") as fh:
        fh.write("origin_index,step,prediction,interval_low,interval_high,"
                 "variance_low,variance_point,variance_high\n")
        for origin, result in zip(walk.origins, walk.results):
            for k in range(steps):
                pred = result.points[k] * span + lo
                ilow = result.intervals[k].low * span + lo
                ihigh = result.intervals[k].high * span + lo
                var = result.variances[k]
                vl, vp, vh = (var.lower * span * span,
                              var.point * span * span,
                              var.upper * span * span)
                assert ilow <= pred <= ihigh, "midpoint left its interval"
                fh.write(f"{origin},{k + 1},{pred!r},{ilow!r},{ihigh!r},"
                         f"{vl!r},{vp!r},{vh!r}\n")
    _write_run_config(out_dir, eff, "predict")
    print(f"wrote {out_path} ({len(walk.origins)} origins x {steps} steps)")
    return 0


def cmd_benchmark(args) -> int:
    eff = _effective(args)
    datasets_spec = eff.get("datasets")
    models_spec = eff.get("models")
    if not datasets_spec or not models_spec:
        raise UsageError("benchmark needs 'datasets' and 'models' (config file or flags)")
    if isinstance(datasets_spec, str):
        datasets_spec = [datasets_spec]
    if isinstance(models_spec, str):
        models_spec = [models_spec]
    config = _model_config(eff)
    datasets = [_load_dataset(spec, eff) for spec in datasets_spec]
    try:
        specs = [ModelSpec.parse(str(m)) for m in models_spec]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    report = benchmark(
        datasets, specs, config,
        train_fraction=float(eff["train_fraction"]),
        lags=int(eff["lags"]),
        outlier_k=float(eff["outlier_k"]),
        neighborhood=int(eff["neighborhood"]),
    )
    out_dir = Path(eff["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    report.save_json(out_dir / "report.json")
    report.write_metric_grids(out_dir)
    report.write_traces(out_dir / "traces")
    _write_run_config(out_dir, eff, "benchmark")

    failures = [(c.dataset, c.model, c.error)
                for c in report.cells.values() if c.error]
    print(f"benchmark: {len(report.cells) - len(failures)}/{len(report.cells)} "
          f"cells succeeded; outputs in {out_dir}")
    for ds, m, err in failures:
        print(f"  FAILED {ds} x {m}: {err}")
    if report.all_failed:
        raise DataError("every benchmark cell failed")
    return 0


def cmd_diagnose(args) -> int:
    eff = _effective(args)
    if not eff.get("residuals"):
        raise UsageError("diagnose requires --residuals <csv>")
    series = load_csv(eff["residuals"], _column(eff["value_column"]))
    values = series.require_complete()
    h = int(eff["lags"])
    if h >= len(values):
        raise UsageError(f"lag count h={h} must be smaller than the series length {len(values)}")
    result = ljung_box(values, h)

    print(f"Ljung-Box Q = {result.q:.6f}  df = {result.h}  p-value = {result.p_value:.6g}")
    print("lag  autocorrelation")
    for r, rho in enumerate(result.autocorrs, start=1):
        print(f"{r:3d}  {rho:+.6f}")
    out_dir = Path(eff["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "diagnosis.json").write_text(
        json.dumps(result.to_dict(), sort_keys=True, indent=2) + "\n")
    _write_run_config(out_dir, eff, "diagnose")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--window", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--confidence", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--sets-per-input", dest="sets_per_input", type=int)
    p.add_argument("--sigma-floor", dest="sigma_floor", type=float)
    p.add_argument("--variance-mode", dest="initial_variance_mode",
                   choices=("sample", "zero"))
    p.add_argument("--optimizer", choices=("hill", "grid"))


def _add_data_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--value-column", dest="value_column")
    p.add_argument("--timestamp-column", dest="timestamp_column")
    p.add_argument("--outlier-k", dest="outlier_k", type=float)
    p.add_argument("--interp-n", dest="neighborhood", type=int)


def build_parser() -> _Parser:
    parser = _Parser(prog="it2garch",
                     description="Volatility-adaptive fuzzy forecasting toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a seeded synthetic series")
    _add_common(p)
    p.add_argument("--omega", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--mean", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit a model to a CSV series")
    _add_common(p)
    _add_data_opts(p)
    p.add_argument("--data")
    p.add_argument("--model-out", dest="model_out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="rolling multi-step forecasts from a saved model")
    _add_common(p)
    _add_data_opts(p)
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("benchmark", help="dataset x model metric grid")
    _add_common(p)
    _add_data_opts(p)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--lags", type=int)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("diagnose", help="Ljung-Box residual diagnostics")
    _add_common(p)
    p.add_argument("--residuals")
    p.add_argument("--value-column", dest="value_column")
    p.add_argument("--lags", type=int)
    p.set_defaults(func=cmd_diagnose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 3


def entrypoint() -> None:
    sys.exit(main())
