"""End-to-end training and rolling multi-step forecasting.

Training runs in two phases.  A structure pass walks the training span once
with the initial parameters: per step it estimates the variance interval,
builds the three-sigma fuzzy sets, classifies the window into an antecedent,
retains at most one rule per distinct antecedent, predicts, and feeds the
realized standardized residual back into the variance recursion.  The rule
structure is then frozen and a derivative-free optimizer searches the joint
vector (omega, alpha1, beta1) ++ all rule coefficients by replaying the same
forward pass; the replay is the hot loop and runs on the selected kernel
backend.

Forecasting rolls the window: each prediction becomes the newest window
element and the center of the next step's membership functions.  The point
variance uses the realized residual while observations exist and E[eps^2]=1
beyond the last observation.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .fuzzy import (
    FuzzyOutputInterval,
    RuleBase,
    build_sets,
    classify_antecedent,
    retain_rule,
)
from .garch import (
    ChiSquareBounds,
    GarchParams,
    ResidualState,
    VarianceInterval,
    make_bounds,
    variance_triple,
)
from .optimizer import OptimizeResult, grid_refine, optimize_params
from .series import DataError, ScalingParams, TimeSeries

__all__ = [
    "ModelConfig",
    "DiagnosticCounters",
    "ForecastResult",
    "TrainingReport",
    "TrainedModel",
    "WalkResult",
    "derive_seed",
    "fit_scaling",
    "estimate_center_train",
    "estimate_center_predict",
    "forecast_step",
    "forecast_multi",
    "train",
    "walk_forecast",
]

MODEL_SCHEMA = "it2garch.model/1"

#: omega floor used when projecting optimizer proposals
OMEGA_FLOOR = 1e-8


def derive_seed(master: int, *labels: str) -> int:
    """Stable child seed from (master seed, purpose labels) via SHA-256."""
    key = "|".join([str(int(master)), *labels]).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


@dataclass(frozen=True)
class ModelConfig:
    """Everything a training or forecasting run needs besides the data."""

    window: int = 5
    sets_per_input: int = 3
    confidence: float = 0.95
    steps: int = 1
    iterations: int = 400
    seed: int = 0
    initial_variance_mode: str = "sample"
    sigma_floor: float = 1e-8
    stochastic_innovations: bool = False
    optimizer: str = "hill"

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.sets_per_input < 1:
            raise ValueError("sets_per_input must be >= 1")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie strictly in (0, 1)")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.initial_variance_mode not in ("sample", "zero"):
            raise ValueError("initial_variance_mode must be 'sample' or 'zero'")
        if not self.sigma_floor > 0.0:
            raise ValueError("sigma_floor must be positive")
        if self.optimizer not in ("hill", "grid"):
            raise ValueError("optimizer must be 'hill' or 'grid'")

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "sets_per_input": self.sets_per_input,
            "confidence": self.confidence,
            "steps": self.steps,
            "iterations": self.iterations,
            "seed": self.seed,
            "initial_variance_mode": self.initial_variance_mode,
            "sigma_floor": self.sigma_floor,
            "stochastic_innovations": self.stochastic_innovations,
            "optimizer": self.optimizer,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelConfig":
        return cls(**doc)


@dataclass
class DiagnosticCounters:
    sigma_floor_hits: int = 0
    zero_firing_fallbacks: int = 0

    def add(self, floor_hits: int, zero_hits: int) -> None:
        self.sigma_floor_hits += floor_hits
        self.zero_firing_fallbacks += zero_hits


@dataclass(frozen=True)
class ForecastResult:
    """Multi-step forecast: per-horizon points, fuzzy intervals, variances."""

    points: tuple
    intervals: tuple
    variances: tuple
    diagnostics: DiagnosticCounters

    def __post_init__(self):
        if not len(self.points) == len(self.intervals) == len(self.variances):
            raise ValueError("forecast components must have equal lengths")


@dataclass(frozen=True)
class TrainingReport:
    """Audit trail of one training run (not serialized with the model)."""

    initial_mse: float
    final_mse: float
    accepted: tuple
    evaluations: int
    wall_time_s: float
    rules: int
    diagnostics: DiagnosticCounters
    final_state: ResidualState


@dataclass
class TrainedModel:
    garch: GarchParams
    rulebase: RuleBase
    config: ModelConfig
    scaling: ScalingParams
    training_mse: float
    report: TrainingReport | None = field(default=None, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def kernel_arrays(self) -> tuple:
        """Contiguous (antecedents, coefficients) arrays for the kernels."""
        if "arrays" not in self._cache:
            ant = np.ascontiguousarray(
                [r.antecedent for r in self.rulebase.rules], dtype=np.int64
            )
            coeffs = np.ascontiguousarray(
                [r.coeffs for r in self.rulebase.rules], dtype=np.float64
            )
            self._cache["arrays"] = (ant, coeffs)
        return self._cache["arrays"]

    def bounds(self) -> ChiSquareBounds:
        if "bounds" not in self._cache:
            self._cache["bounds"] = make_bounds(self.config.confidence)
        return self._cache["bounds"]

    def to_dict(self) -> dict:
        return {
            "schema": MODEL_SCHEMA,
            "garch": {
                "omega": self.garch.omega,
                "alpha1": self.garch.alpha1,
                "beta1": self.garch.beta1,
            },
            "rulebase": self.rulebase.to_dict(),
            "config": self.config.to_dict(),
            "scaling": {"min": self.scaling.min, "max": self.scaling.max},
            "training_mse": self.training_mse,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainedModel":
        if doc.get("schema") != MODEL_SCHEMA:
            raise ValueError(
                f"unsupported model schema {doc.get('schema')!r}, expected {MODEL_SCHEMA!r}"
            )
        return cls(
            garch=GarchParams(**doc["garch"]),
            rulebase=RuleBase.from_dict(doc["rulebase"]),
            config=ModelConfig.from_dict(doc["config"]),
            scaling=ScalingParams(**doc["scaling"]),
            training_mse=float(doc["training_mse"]),
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "TrainedModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def fit_scaling(series: TimeSeries) -> tuple:
    """Normalized values plus scaling parameters, tolerating constant series.

    A constant series has no min-max range; it is mapped to all-zeros with a
    unit-span ScalingParams so the inverse transform still recovers the
    constant.
    """
    xs = series.require_complete()
    lo = float(xs.min())
    hi = float(xs.max())
    if hi == lo:
        params = ScalingParams(lo, lo + 1.0)
        return np.zeros_like(xs), params
    params = ScalingParams(lo, hi)
    return (xs - lo) / params.span, params


def estimate_center_train(window: Sequence[float]) -> float:
    """Training-phase membership center: the window mean."""
    if len(window) == 0:
        raise ValueError("empty window")
    return math.fsum(window) / len(window)


def estimate_center_predict(prev_prediction: float) -> float:
    """Prediction-phase membership center: the previous step's forecast."""
    if not math.isfinite(prev_prediction):
        raise ValueError(f"previous prediction must be finite, got {prev_prediction!r}")
    return float(prev_prediction)


def _kernel():
    return kernels.active_backend()


def _run_step(model: TrainedModel, xw: np.ndarray, var_prev: float,
              eps_sq: float, center: float):
    ant, coeffs = model.kernel_arrays()
    b = model.bounds()
    g = model.garch
    return _kernel().step_detail(
        xw, center, var_prev, eps_sq, ant, coeffs, model.config.sets_per_input,
        g.omega, g.alpha1, g.beta1, b.q_low, b.q_high, model.config.sigma_floor,
    )


def forecast_step(model: TrainedModel, window: Sequence[float],
                  state: ResidualState, center: float) -> tuple:
    """One forecast: variance interval, fuzzy sets, rule selection, midpoint.

    Returns ``(prediction, fuzzy_interval, variance_interval, new_state)``.
    The new state carries the predicted point variance; its residual slot is
    ``None`` until the caller observes an actual value and fills it via
    :func:`it2garch.garch.residual_update`.
    """
    w = model.config.window
    if len(window) != w:
        raise ValueError(f"window length {len(window)} != configured window {w}")
    xw = np.ascontiguousarray(window, dtype=np.float64)
    if not np.all(np.isfinite(xw)):
        raise ValueError("window values must be finite")
    (pred, out_lo, out_hi, v_low, v_point, v_high,
     _sel_l, _sel_r, _f_high, _f_low, _fh, _zh) = _run_step(
        model, xw, state.variance, state.eps_sq, float(center))
    return (
        pred,
        FuzzyOutputInterval(out_lo, out_hi),
        VarianceInterval(v_low, v_point, v_high),
        ResidualState(None, v_point),
    )


def forecast_multi(model: TrainedModel, window: Sequence[float],
                   state: ResidualState, steps: int) -> ForecastResult:
    """Rolling multi-step forecast from one origin.

    The first step consumes the caller's state (realized residual if one is
    present); afterwards each prediction replaces the oldest window element
    and becomes the next membership center, with E[eps^2] = 1 driving the
    variance recursion (or a drawn innovation when the model was configured
    with stochastic innovations).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    w = model.config.window
    if len(window) != w:
        raise ValueError(f"window length {len(window)} != configured window {w}")
    cfg = model.config
    rng = None
    if cfg.stochastic_innovations:
        rng = np.random.default_rng(derive_seed(cfg.seed, "innovations"))

    win = np.ascontiguousarray(window, dtype=np.float64)
    if not np.all(np.isfinite(win)):
        raise ValueError("window values must be finite")
    center = estimate_center_train(win)
    eps_sq = state.eps_sq
    var_prev = state.variance
    points = []
    intervals = []
    variances = []
    diag = DiagnosticCounters()
    for _ in range(steps):
        (pred, out_lo, out_hi, v_low, v_point, v_high,
         _sel_l, _sel_r, _f_high, _f_low, fh, zh) = _run_step(
            model, win, var_prev, eps_sq, center)
        diag.add(fh, zh)
        points.append(pred)
        intervals.append(FuzzyOutputInterval(out_lo, out_hi))
        variances.append(VarianceInterval(v_low, v_point, v_high))
        win = np.ascontiguousarray(np.append(win[1:], pred))
        center = estimate_center_predict(pred)
        var_prev = v_point
        if rng is not None:
            draw = float(rng.standard_normal())
            eps_sq = draw * draw
        else:
            eps_sq = 1.0
    return ForecastResult(
        points=tuple(points),
        intervals=tuple(intervals),
        variances=tuple(variances),
        diagnostics=diag,
    )


def _initial_variance(z: np.ndarray, w: int, mode: str) -> float:
    if mode == "zero" or w < 2:
        return 0.0
    return float(np.var(z[:w], ddof=1))


def _structure_pass(z, centers, config, bounds, garch_init, init_row,
                    eps0, var0, static_variance):
    """Algorithm pass that builds the rule base and the residual trajectory.

    Classification runs on the same variance triple the kernel would compute;
    predictions (needed only to propagate the realized residual) run on the
    kernel with the rules retained so far.
    """
    w = config.window
    m = config.sets_per_input
    floor = config.sigma_floor
    n_steps = len(centers)
    ker = _kernel()
    rb = RuleBase(w, m)
    ant_arr = None
    coeff_arr = None
    eps = eps0
    var = var0
    for i in range(n_steps):
        xw = np.ascontiguousarray(z[i : i + w])
        if static_variance is not None:
            sv = static_variance
            triple = VarianceInterval(sv, sv, sv)
        else:
            triple = variance_triple(garch_init, var, bounds, eps * eps)
        sets = build_sets(centers[i], triple, m, floor)
        ant = classify_antecedent(tuple(xw), sets)
        if ant not in rb.index:
            retain_rule(rb, ant, init_row)
            ant_arr = np.ascontiguousarray(
                [r.antecedent for r in rb.rules], dtype=np.int64
            )
            coeff_arr = np.ascontiguousarray(
                [r.coeffs for r in rb.rules], dtype=np.float64
            )
        if static_variance is not None:
            out = ker.step_fuzzy(xw, centers[i], triple.lower, triple.point,
                                 triple.upper, ant_arr, coeff_arr, m, floor)
            pred = out[0]
        else:
            out = ker.step_detail(xw, centers[i], var, eps * eps, ant_arr,
                                  coeff_arr, m, garch_init.omega,
                                  garch_init.alpha1, garch_init.beta1,
                                  bounds.q_low, bounds.q_high, floor)
            pred = out[0]
        sig = math.sqrt(triple.point)
        if sig < floor:
            sig = floor
        eps = (float(z[i + w]) - pred) / sig
        var = triple.point
    return rb


def train(series: TimeSeries, config: ModelConfig,
          pin_garch: GarchParams | None = None,
          static_variance: float | None = None) -> TrainedModel:
    """Fit a model: structure pass, then joint coefficient optimization.

    ``pin_garch`` freezes the GARCH coefficients at the given values (they
    leave the optimization vector but the recursion still runs), used to
    ablate the variance track.  ``static_variance`` replaces the recursion
    with a constant variance entirely; this is the fixed-variance baseline's
    path.  Deterministic for a fixed (series, config): child seeds are
    derived from ``config.seed``.
    """
    if pin_garch is not None and static_variance is not None:
        raise ValueError("pin_garch and static_variance are mutually exclusive")
    if static_variance is not None and static_variance < 0.0:
        raise ValueError("static_variance must be non-negative")
    w = config.window
    z_all = series.require_complete()
    if len(z_all) < w + 2:
        raise DataError(
            f"series {series.name!r}: need more than {w + 1} points to train "
            f"with window {w}, got {len(z_all)}"
        )

    started = time.perf_counter()
    z, scaling = fit_scaling(series)
    z = np.ascontiguousarray(z)
    n = len(z)
    n_steps = n - w
    centers = np.ascontiguousarray(
        [estimate_center_train(z[i : i + w]) for i in range(n_steps)]
    )
    targets = z[w:]

    bounds = make_bounds(config.confidence)
    eps0 = float(np.random.default_rng(derive_seed(config.seed, "eps0")).standard_normal())
    var0 = _initial_variance(z, w, config.initial_variance_mode)
    sample_var = float(np.var(z, ddof=1)) if n > 1 else 0.0

    if pin_garch is not None:
        garch_init = pin_garch
    elif static_variance is not None:
        garch_init = None
    else:
        garch_init = GarchParams(max(0.1 * sample_var, OMEGA_FLOOR), 0.2, 0.7)

    init_row = tuple([0.0] * w + [1.0])  # persistence consequent: predict the last value
    rb = _structure_pass(z, centers, config, bounds, garch_init, init_row,
                         eps0, var0, static_variance)

    n_rules = len(rb)
    ant_arr = np.ascontiguousarray([r.antecedent for r in rb.rules], dtype=np.int64)
    coeffs0 = np.ascontiguousarray([r.coeffs for r in rb.rules], dtype=np.float64)
    ker = _kernel()
    m = config.sets_per_input
    floor = config.sigma_floor
    garch_is_free = pin_garch is None and static_variance is None

    def replay(omega, alpha, beta, coeff_mat):
        if static_variance is not None:
            return ker.replay_static(z, w, m, centers, ant_arr, coeff_mat,
                                     static_variance, floor, eps0, var0)
        return ker.replay_train(z, w, m, centers, ant_arr, coeff_mat,
                                omega, alpha, beta, bounds.q_low,
                                bounds.q_high, floor, eps0, var0)

    if garch_is_free:
        def objective(vec):
            coeff_mat = vec[3:].reshape(n_rules, w + 1)
            preds, _, _, _, _ = replay(vec[0], vec[1], vec[2], coeff_mat)
            diff = preds - targets
            return math.fsum(diff * diff) / n_steps

        def project(vec):
            vec = vec.copy()
            vec[0] = max(vec[0], OMEGA_FLOOR)
            vec[1] = max(vec[1], 0.0)
            vec[2] = max(vec[2], 0.0)
            return vec

        vec0 = np.concatenate(
            [[garch_init.omega, garch_init.alpha1, garch_init.beta1], coeffs0.ravel()]
        )
        scale = np.concatenate(
            [[0.25 * garch_init.omega + 1e-5, 0.1, 0.1],
             np.full(coeffs0.size, 0.1)]
        )
    else:
        pinned = pin_garch if pin_garch is not None else GarchParams(1.0, 0.0, 0.0)

        def objective(vec):
            coeff_mat = vec.reshape(n_rules, w + 1)
            preds, _, _, _, _ = replay(pinned.omega, pinned.alpha1, pinned.beta1,
                                       coeff_mat)
            diff = preds - targets
            return math.fsum(diff * diff) / n_steps

        project = None
        vec0 = coeffs0.ravel().copy()
        scale = np.full(coeffs0.size, 0.1)

    if config.optimizer == "grid":
        result: OptimizeResult = grid_refine(objective, vec0, config.iterations,
                                             scale=scale, project=project)
    else:
        result = optimize_params(objective, vec0, config.iterations,
                                 derive_seed(config.seed, "optimize"),
                                 scale=scale, project=project)

    best = result.vector
    if garch_is_free:
        garch_best = GarchParams(float(best[0]), float(best[1]), float(best[2]))
        coeff_best = best[3:].reshape(n_rules, w + 1)
    else:
        if static_variance is not None:
            omega = static_variance if static_variance > 0.0 else floor * floor
            garch_best = GarchParams(omega, 0.0, 0.0)
        else:
            garch_best = pin_garch
        coeff_best = best.reshape(n_rules, w + 1)
    rb.replace_coeffs([tuple(row) for row in coeff_best])

    preds, floor_hits, zero_hits, final_eps, final_var = replay(
        garch_best.omega, garch_best.alpha1, garch_best.beta1,
        np.ascontiguousarray(coeff_best))
    report = TrainingReport(
        initial_mse=result.initial_value,
        final_mse=result.value,
        accepted=tuple(result.accepted),
        evaluations=result.evaluations,
        wall_time_s=time.perf_counter() - started,
        rules=n_rules,
        diagnostics=DiagnosticCounters(floor_hits, zero_hits),
        final_state=ResidualState(final_eps, final_var),
    )
    return TrainedModel(
        garch=garch_best,
        rulebase=rb,
        config=config,
        scaling=scaling,
        training_mse=result.value,
        report=report,
    )


@dataclass(frozen=True)
class WalkResult:
    """Forecasts produced while walking an observed series.

    ``origins[i]`` is the index of the last observed point behind
    ``results[i]``; all values are in normalized (model) space.
    """

    origins: tuple
    results: tuple
    diagnostics: DiagnosticCounters


def walk_forecast(model: TrainedModel, series: TimeSeries,
                  steps: int | None = None,
                  origins: Sequence[int] | None = None) -> WalkResult:
    """Walk a series with realized residual feedback, forecasting per origin.

    The variance state warms up from the start of the series exactly as in
    training (same seeded initial residual, same initial-variance policy).
    At every window position the one-step prediction updates the residual
    state; full multi-step forecasts are recorded for the requested origins
    (default: every origin with a full window).
    """
    cfg = model.config
    w = cfg.window
    if steps is None:
        steps = cfg.steps
    raw = series.require_complete()
    if len(raw) < w + 1:
        raise DataError(
            f"series {series.name!r}: need at least {w + 1} points to walk "
            f"with window {w}"
        )
    z = np.ascontiguousarray((raw - model.scaling.min) / model.scaling.span)
    n = len(z)
    wanted = set(range(w - 1, n)) if origins is None else set(int(t) for t in origins)
    for t in wanted:
        if not w - 1 <= t < n:
            raise ValueError(f"origin {t} outside valid range [{w - 1}, {n - 1}]")

    eps0 = float(np.random.default_rng(derive_seed(cfg.seed, "eps0")).standard_normal())
    var0 = _initial_variance(z, w, cfg.initial_variance_mode)
    state = ResidualState(eps0, var0)
    floor = cfg.sigma_floor

    out_origins = []
    out_results = []
    totals = DiagnosticCounters()
    for t in range(w - 1, n):
        win = z[t - w + 1 : t + 1]
        result = None
        if t in wanted:
            result = forecast_multi(model, win, state, steps)
            totals.add(result.diagnostics.sigma_floor_hits,
                       result.diagnostics.zero_firing_fallbacks)
            out_origins.append(t)
            out_results.append(result)
        if t + 1 < n:
            if result is not None:
                pred1 = result.points[0]
                v_point = result.variances[0].point
            else:
                center = estimate_center_train(win)
                (pred1, _lo, _hi, _vl, v_point, _vh, _sl, _sr,
                 _fb, _fl, fh, zh) = _run_step(model, win, state.variance,
                                               state.eps_sq, center)
                totals.add(fh, zh)
            sig = math.sqrt(v_point)
            if sig < floor:
                sig = floor
                totals.sigma_floor_hits += 1
            eps = (float(z[t + 1]) - pred1) / sig
            state = ResidualState(eps, v_point)
    return WalkResult(tuple(out_origins), tuple(out_results), totals)
