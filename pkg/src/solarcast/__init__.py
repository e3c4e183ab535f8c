"""Hour-ahead solar irradiance forecasting workbench."""

from .geometry import (
    SiteLocation,
    clearness_index,
    day_night_flag,
    extraterrestrial_horizontal,
    irradiance_from_clearness,
)
from .ingest import (
    HourlyRecord,
    HourlySeries,
    Quality,
    clean_clearness,
    clean_irradiance,
    impute_gaps,
    ingest_pipeline,
    parse_generic_csv,
    parse_tmy3,
    read_canonical,
    write_canonical,
)
from .baseline import simple_forecast, simple_forecast_series
from .sarima import SarimaModel, SarimaOrder, fit_css, forecast_one, grid_search, seasonal_difference
from .linmod import DesignSpec, LinearModel, build_design, multi_hour_predict, ols_fit, predict
from .ann import MlpConfig, MlpModel, forward, gradient_check, sigmoid, train
from .evaluation import (
    EvalReport,
    MetricSet,
    ModelSpec,
    SplitPlan,
    compare_models,
    compute_metrics,
    kfold,
    split_holdout_years,
    split_monthly_3w1w,
)
from .synth import SynthConfig, generate

__version__ = "0.1.0"
