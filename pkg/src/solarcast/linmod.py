"""Cloud-cover regression designs (LR, LMX, LDMX, LMX2, LMX2M) and OLS fitting.

Each family predicts hourly irradiance from day-old irradiance plus cloud-cover
terms; the current-hour cloud cover stands in for a cloud-cover forecast, which
is treated as known.  Designs carry no intercept unless explicitly requested.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, EmptyDesignError, UnavailableLagError
from .ingest import HourlySeries, IRRADIANCE_MAX

FAMILIES = ("LR", "LMX", "LDMX", "LMX2", "LMX2M")
DATA_FILTERS = ("all_hours", "daytime_only")
SEASONAL_LAG = 24
MAX_HOURLY_ORDER = 4
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class DesignSpec:
    """Declarative description of one regression variant.

    ``order`` is the hourly lag depth (LMX/LDMX only); ``month`` restricts
    rows to one calendar month (required for LMX2M, forbidden for LMX2).
    """

    family: str
    order: int | None = None
    month: int | None = None
    data_filter: str = "all_hours"
    include_intercept: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.data_filter not in DATA_FILTERS:
            raise ValueError(f"unknown data_filter {self.data_filter!r}")
        if self.family in ("LMX", "LDMX"):
            if self.order is None or not 1 <= self.order <= MAX_HOURLY_ORDER:
                raise ValueError(f"{self.family} needs order in 1..{MAX_HOURLY_ORDER}")
        elif self.order is not None:
            raise ValueError(f"{self.family} takes no order")
        if self.family == "LMX2" and self.month is not None:
            raise ValueError("LMX2 is annual-only")
        if self.family == "LMX2M" and self.month is None:
            raise ValueError("LMX2M needs a month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValueError(f"month {self.month} outside 1..12")

    def label(self) -> str:
        bits = [self.family]
        if self.order is not None:
            bits.append(f"m{self.order}")
        if self.month is not None:
            bits.append(f"{self.month:02d}")
        if self.data_filter == "daytime_only":
            bits.append("day")
        return "-".join(bits)


@dataclass
class LinearModel:
    spec: DesignSpec | None
    columns: list[str]
    coefficients: np.ndarray
    training_rmse: float = float("nan")
    training_mae: float = float("nan")
    n_rows: int = 0


@dataclass
class Design:
    matrix: np.ndarray
    target: np.ndarray
    row_indices: np.ndarray  # series hour indices of the target hours
    timestamps: np.ndarray
    columns: list[str]
    daytime: np.ndarray = field(default=None)


def _shift(values: np.ndarray, lag: int) -> np.ndarray:
    out = np.full(len(values), np.nan)
    if lag == 0:
        return values.astype(np.float64, copy=True)
    out[lag:] = values[:-lag]
    return out


def _feature_columns(series: HourlySeries, spec: DesignSpec, cloud_forecast=None):
    """Ordered (name, full-length array) pairs, exactly as fitted and predicted.

    ``cloud_forecast`` substitutes for the current-hour cloud cover (the term
    a deployment would have to forecast); lagged cloud values always come from
    observations.  Default: the observed cloud cover, treated as known.
    """
    irr = series.irradiance
    cc = series.cloud_cover
    if cloud_forecast is None:
        cc_now = cc.astype(np.float64, copy=True)
    else:
        cc_now = np.asarray(cloud_forecast, dtype=np.float64)
        if cc_now.shape != cc.shape:
            raise ValueError(f"cloud_forecast length {cc_now.shape} != series length {cc.shape}")
    cols: list[tuple[str, np.ndarray]] = []
    if spec.include_intercept:
        cols.append(("intercept", np.ones(len(series))))

    if spec.family == "LR":
        cols.append(("i_lag24", _shift(irr, SEASONAL_LAG)))
        cols.append(("cc_diff24", cc_now - _shift(cc, SEASONAL_LAG)))
    elif spec.family in ("LMX", "LDMX"):
        m = spec.order
        for i in range(1, m + 1):
            if spec.family == "LMX":
                cols.append((f"i_lag{i}", _shift(irr, i)))
            else:
                cols.append((f"i_detrend{i}", _shift(irr, i) - _shift(irr, i + 1)))
        cols.append(("i_lag24", _shift(irr, SEASONAL_LAG)))
        for i in range(1, m + 1):
            cols.append((f"cc_diff{i}", cc_now - _shift(cc, i)))
        cols.append(("cc_diff24", cc_now - _shift(cc, SEASONAL_LAG)))
    else:  # LMX2 / LMX2M
        for lag in (1, 2, SEASONAL_LAG):
            cols.append((f"i_lag{lag}", _shift(irr, lag)))
        for lag in (1, 2, SEASONAL_LAG):
            cols.append((f"cc_lag{lag}", _shift(cc, lag)))
        cols.append(("cc_now", cc_now))
        hour = series.hour_of_day()
        for h in range(2, 25):  # hour 1 is the reference level
            cols.append((f"hour_{h:02d}", (hour == h).astype(np.float64)))
        if spec.family == "LMX2":
            month = series.month()
            for m in range(2, 13):  # January is the reference level
                cols.append((f"month_{m:02d}", (month == m).astype(np.float64)))
    return cols


def build_design(series: HourlySeries, spec: DesignSpec, cloud_forecast=None) -> Design:
    """Assemble the design matrix, keeping only rows with every required lag valid."""
    cols = _feature_columns(series, spec, cloud_forecast)
    matrix = np.column_stack([arr for _, arr in cols])
    target = series.irradiance.astype(np.float64, copy=True)

    valid = np.isfinite(target) & np.all(np.isfinite(matrix), axis=1)
    daytime = series.daytime()
    if spec.data_filter == "daytime_only":
        valid &= daytime
    if spec.month is not None:
        valid &= series.month() == spec.month

    rows = np.nonzero(valid)[0]
    if len(rows) == 0:
        raise EmptyDesignError(f"no usable rows for {spec.label()}")
    return Design(
        matrix=matrix[rows],
        target=target[rows],
        row_indices=rows,
        timestamps=series.timestamps[rows],
        columns=[name for name, _ in cols],
        daytime=daytime[rows],
    )


def ols_fit(matrix, target, columns=None, spec: DesignSpec | None = None) -> LinearModel:
    """Least-squares fit via QR; raises ConditioningError on (near-)rank deficiency."""
    x = np.asarray(matrix, dtype=np.float64)
    y = np.asarray(target, dtype=np.float64)
    n, k = x.shape
    names = list(columns) if columns is not None else [f"x{i}" for i in range(k)]
    if n < k:
        raise ConditioningError(f"{n} rows cannot determine {k} coefficients", columns=names)

    q, r = np.linalg.qr(x)
    rdiag = np.abs(np.diag(r))
    largest = float(np.max(rdiag)) if k else 0.0
    if largest == 0.0:
        raise ConditioningError("design matrix is zero", columns=names)
    smallest = float(np.min(rdiag))
    dependent = [names[i] for i in range(k) if rdiag[i] < 1e-12 * largest]
    if dependent or largest > CONDITION_LIMIT * smallest:
        worst = dependent or [names[int(np.argmin(rdiag))]]
        condition = "inf" if smallest == 0.0 else f"{largest / smallest:.2e}"
        raise ConditioningError(f"rank-deficient design (condition {condition})", columns=worst)
    coefs = np.linalg.solve(r, q.T @ y)

    residuals = y - x @ coefs
    return LinearModel(
        spec=spec,
        columns=names,
        coefficients=coefs,
        training_rmse=float(np.sqrt(np.mean(residuals**2))),
        training_mae=float(np.mean(np.abs(residuals))),
        n_rows=n,
    )


def fit_design(series: HourlySeries, spec: DesignSpec) -> LinearModel:
    design = build_design(series, spec)
    return ols_fit(design.matrix, design.target, design.columns, spec)


def clamp_prediction(values):
    """Clip predictions to the feasible irradiance range [0, 1050]."""
    return np.clip(values, 0.0, IRRADIANCE_MAX)


def predict_rows(model: LinearModel, matrix) -> np.ndarray:
    return clamp_prediction(np.asarray(matrix, dtype=np.float64) @ model.coefficients)


def predict(model: LinearModel, series: HourlySeries, t: int, cloud_forecast=None) -> float:
    """Predict hour ``t`` from the same feature construction used in fitting."""
    if model.spec is None:
        raise ValueError("model carries no design spec")
    cols = _feature_columns(series, model.spec, cloud_forecast)
    row = np.array([arr[t] for _, arr in cols])
    if not np.all(np.isfinite(row)):
        missing = [name for (name, _), v in zip(cols, row) if not np.isfinite(v)]
        raise UnavailableLagError(f"hour {t} lacks {', '.join(missing)}")
    return float(clamp_prediction(row @ model.coefficients))


def multi_hour_predict(model: LinearModel, series: HourlySeries, start: int, horizon: int,
                       cloud_forecast=None) -> np.ndarray:
    """Independent LR predictions for ``horizon`` consecutive hours from day-old data."""
    if model.spec is None or model.spec.family != "LR":
        raise ValueError("multi-hour prediction is defined for the LR family only")
    return np.array([predict(model, series, start + j, cloud_forecast) for j in range(horizon)])
