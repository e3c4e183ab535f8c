"""Simple (persistence) forecast: each hour repeats the value observed 24 hours earlier."""

from __future__ import annotations

import numpy as np

from .errors import UnavailableLagError
from .ingest import HourlySeries

SEASONAL_LAG = 24


def simple_forecast(series: HourlySeries, t: int) -> float:
    """Forecast irradiance at hour index ``t`` as the observation at ``t - 24``."""
    if t < SEASONAL_LAG:
        raise UnavailableLagError(f"hour index {t} has no record 24 hours earlier")
    value = series.irradiance[t - SEASONAL_LAG]
    if np.isnan(value):
        raise UnavailableLagError(f"record at index {t - SEASONAL_LAG} is missing")
    return float(value)


def simple_forecast_series(series: HourlySeries) -> np.ndarray:
    """Persistence forecasts for every hour; NaN where the day-old value is unavailable."""
    out = np.full(len(series), np.nan)
    out[SEASONAL_LAG:] = series.irradiance[:-SEASONAL_LAG]
    return out
