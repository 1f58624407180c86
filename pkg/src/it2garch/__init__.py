"""Volatility-adaptive interval type-2 fuzzy forecasting for heteroskedastic series.

A GARCH(1,1) recursion supplies per-step conditional-variance intervals that
parameterize the Gaussian membership functions of an interval type-2 TSK
fuzzy system; rolling defuzzified midpoints are the forecasts.  Hot loops run
on a compiled kernel when available (``it2garch.kernels.backend_name()``),
with a bit-identical pure-Python fallback.
"""

from .benchmark import BenchmarkReport, ModelSpec, benchmark, fixed_variance_baseline
from .fuzzy import (
    FuzzyOutputInterval,
    FuzzyRule,
    GaussianIT2Set,
    IntervalMembership,
    RuleBase,
    build_sets,
    classify_antecedent,
    consequent_eval,
    defuzzify,
    firing_strength,
    fuzzy_output,
    membership,
    retain_rule,
    select_rules,
)
from .garch import (
    ChiSquareBounds,
    GarchParams,
    ResidualState,
    VarianceInterval,
    chi_square_quantile,
    make_bounds,
    residual_update,
    simulate_garch,
    variance_interval_step,
    variance_step,
)
from .kernels import backend_name
from .metrics import (
    LjungBoxResult,
    MetricsReport,
    autocorrelation,
    evaluate,
    ljung_box,
    mae,
    mape,
    mse,
    r2,
    rmse,
)
from .model import (
    ForecastResult,
    ModelConfig,
    TrainedModel,
    estimate_center_predict,
    estimate_center_train,
    forecast_multi,
    forecast_step,
    train,
    walk_forecast,
)
from .optimizer import OptimizeResult, grid_refine, optimize_params
from .series import (
    DataError,
    ScalingParams,
    TimeSeries,
    denormalize,
    flag_outliers,
    interpolate_missing,
    load_csv,
    normalize_minmax,
    sliding_windows,
    train_test_split,
)

__version__ = "0.1.0"
