"""Seasonal ARIMA with period 24: differencing, CSS fitting, one-step forecasts, grid search.

Estimation minimizes the conditional sum of squared one-step residuals
(zero pre-sample errors) with a Levenberg-Marquardt loop over the model
coefficients.  The AR side acts on observations and the MA side on errors,
i.e. the conventional multiplicative SARIMA form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._kernels import css_residuals
from .errors import (
    ConditioningError,
    ConvergenceError,
    GridSearchError,
    SeriesLengthError,
    UnavailableLagError,
)

PERIOD = 24


@dataclass(frozen=True)
class SarimaOrder:
    p: int
    d: int
    q: int
    P: int
    D: int
    Q: int
    period: int = PERIOD

    def __post_init__(self):
        for name in ("p", "q", "P", "Q"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.d not in (0, 1) or self.D not in (0, 1):
            raise ValueError("d and D must be 0 or 1")
        if self.period != PERIOD:
            raise ValueError(f"period must be {PERIOD}")

    @property
    def parameter_count(self) -> int:
        return self.p + self.q + self.P + self.Q + 1

    @property
    def has_intercept(self) -> bool:
        # a constant only makes sense on an undifferenced series
        return self.d == 0 and self.D == 0

    @property
    def burn_in(self) -> int:
        return max(self.p, self.period * self.P) + self.q + self.period * self.Q

    def label(self) -> str:
        return f"({self.p},{self.d},{self.q})({self.P},{self.D},{self.Q}){self.period}"


@dataclass
class SarimaModel:
    order: SarimaOrder
    ar: np.ndarray
    ma: np.ndarray
    sar: np.ndarray
    sma: np.ndarray
    intercept: float
    training_rmse: float
    training_mae: float = float("nan")
    n_obs: int = 0
    objective_history: list = field(default_factory=list)
    diverged: bool = False

    @property
    def parameter_count(self) -> int:
        return self.order.parameter_count


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 200
    gradient_tol: float = 1e-8
    step_tol: float = 1e-10
    fd_step: float = 1e-6
    initial_damping: float = 1e-3
    max_damping: float = 1e12


def seasonal_difference(values, d: int, D: int, period: int = PERIOD) -> np.ndarray:
    """Apply (1-B)^d (1-B^period)^D; output shrinks by d + period*D."""
    w = np.asarray(values, dtype=np.float64)
    if len(w) <= d + period * D:
        raise SeriesLengthError(f"series of length {len(w)} too short for d={d}, D={D}, period={period}")
    for _ in range(D):
        w = w[period:] - w[:-period]
    for _ in range(d):
        w = w[1:] - w[:-1]
    return w


def invert_difference(w, initial, d: int, D: int, period: int = PERIOD) -> np.ndarray:
    """Undo seasonal_difference; ``initial`` holds the first d + period*D original values.

    Returns the full reconstructed series (initial values included).
    """
    v = np.asarray(w, dtype=np.float64)
    init = np.asarray(initial, dtype=np.float64)
    if len(init) != d + period * D:
        raise SeriesLengthError(f"need exactly {d + period * D} initial values, got {len(init)}")
    if d == 1:
        # regular difference was applied last, so invert it first
        v0 = init[period] - init[0] if D == 1 else init[0]
        v = np.concatenate([[v0], v]).cumsum()
    if D == 1:
        y = np.concatenate([init[:period], np.empty(len(v))])
        for i in range(len(v)):
            y[period + i] = y[i] + v[i]
        return y
    return v


def _expand_polys(order: SarimaOrder, ar, sar, ma, sma):
    """Multiply hourly and seasonal lag polynomials into sparse (lags, coefs) pairs.

    AR terms enter with sign -1 (they sit on the observation side of the
    recursion), MA terms with +1.
    """

    def poly(hourly, seasonal, sign):
        base = np.concatenate([[1.0], sign * np.asarray(hourly, dtype=np.float64)])
        seas = np.zeros(1 + order.period * len(seasonal))
        seas[0] = 1.0
        for j, c in enumerate(seasonal, start=1):
            seas[j * order.period] = sign * c
        full = np.convolve(base, seas)
        lags = np.nonzero(full[1:])[0] + 1
        return lags.astype(np.int64), full[lags]

    ar_lags, ar_coefs = poly(ar, sar, -1.0)
    ma_lags, ma_coefs = poly(ma, sma, +1.0)
    return ar_lags, ar_coefs, ma_lags, ma_coefs


def _split_params(order: SarimaOrder, params: np.ndarray):
    i = 1 if order.has_intercept else 0
    intercept = params[0] if order.has_intercept else 0.0
    ar = params[i : i + order.p]
    ma = params[i + order.p : i + order.p + order.q]
    sar = params[i + order.p + order.q : i + order.p + order.q + order.P]
    sma = params[i + order.p + order.q + order.P :]
    return intercept, ar, ma, sar, sma


def _residuals(order: SarimaOrder, w: np.ndarray, params: np.ndarray) -> np.ndarray:
    intercept, ar, ma, sar, sma = _split_params(order, params)
    ar_lags, ar_coefs, ma_lags, ma_coefs = _expand_polys(order, ar, sar, ma, sma)
    return css_residuals(w, ar_lags, ar_coefs, ma_lags, ma_coefs, float(intercept))


def fit_css(values, order: SarimaOrder, config: FitConfig = FitConfig()) -> SarimaModel:
    """Fit by conditional sum of squares with a Levenberg-Marquardt loop.

    The first ``order.burn_in`` residuals are excluded from the objective.
    Raises ConvergenceError (carrying the best model so far) at the iteration
    cap and ConditioningError when the normal equations are near-singular.
    """
    y = np.asarray(values, dtype=np.float64)
    if np.any(np.isnan(y)):
        raise SeriesLengthError("series contains missing values; impute before fitting")
    w = seasonal_difference(y, order.d, order.D, order.period)
    burn = order.burn_in
    if len(w) - burn < 10 * order.parameter_count:
        raise SeriesLengthError(
            f"effective length {len(w) - burn} below 10x parameter count ({10 * order.parameter_count})"
        )

    n_params = order.p + order.q + order.P + order.Q + (1 if order.has_intercept else 0)
    params = np.zeros(n_params)
    if order.has_intercept:
        params[0] = float(np.mean(w))

    def objective_residuals(p):
        return _residuals(order, w, p)[burn:]

    def sse(r):
        return float(r @ r)

    r = objective_residuals(params)
    best_sse = sse(r)
    history = [best_sse]
    damping = config.initial_damping
    converged = n_params == 0

    for _ in range(config.max_iter if n_params else 0):
        jac = np.empty((len(r), n_params))
        for j in range(n_params):
            step = config.fd_step * max(1.0, abs(params[j]))
            bumped = params.copy()
            bumped[j] += step
            jac[:, j] = (objective_residuals(bumped) - r) / step
        hess = jac.T @ jac
        diag = np.diag(hess).copy()
        if not np.all(np.isfinite(hess)):
            raise ConditioningError(f"non-finite normal equations for order {order.label()}")
        scale = np.max(diag) if np.max(diag) > 0 else 1.0
        if np.min(diag) < 1e-14 * scale:
            raise ConditioningError(f"near-singular normal equations for order {order.label()}")
        grad = jac.T @ r
        if np.linalg.norm(grad, np.inf) < config.gradient_tol * max(1.0, best_sse):
            converged = True
            break

        accepted = False
        while damping <= config.max_damping:
            try:
                step_vec = np.linalg.solve(hess + damping * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                raise ConditioningError(f"singular damped system for order {order.label()}") from None
            candidate = params + step_vec
            r_cand = objective_residuals(candidate)
            cand_sse = sse(r_cand)
            if np.isfinite(cand_sse) and cand_sse <= best_sse:
                params, r, best_sse = candidate, r_cand, cand_sse
                history.append(best_sse)
                damping = max(damping * 0.3, 1e-12)
                accepted = True
                if np.linalg.norm(step_vec) < config.step_tol * (1.0 + np.linalg.norm(params)):
                    converged = True
                break
            damping *= 10.0
        if not accepted or converged:
            converged = converged or not accepted  # damping exhausted == no further descent
            break

    model = _build_model(order, params, w, burn, history)
    if not converged:
        raise ConvergenceError(
            f"no convergence within {config.max_iter} iterations for order {order.label()}",
            best_model=model,
        )
    return model


def _build_model(order, params, w, burn, history):
    intercept, ar, ma, sar, sma = _split_params(order, params)
    resid = _residuals(order, w, params)[burn:]
    finite = np.all(np.isfinite(resid))
    scale = max(1.0, float(np.max(np.abs(w))) if len(w) else 1.0)
    diverged = (not finite) or float(np.max(np.abs(resid), initial=0.0)) > 1e6 * scale
    return SarimaModel(
        order=order,
        ar=np.array(ar),
        ma=np.array(ma),
        sar=np.array(sar),
        sma=np.array(sma),
        intercept=float(intercept),
        training_rmse=float(np.sqrt(np.mean(resid**2))) if finite else float("inf"),
        training_mae=float(np.mean(np.abs(resid))) if finite else float("inf"),
        n_obs=len(w) - burn,
        objective_history=history,
        diverged=diverged,
    )


def _min_history(order: SarimaOrder) -> int:
    return order.d + order.period * order.D + max(
        order.p + order.period * order.P, order.q + order.period * order.Q
    )


def _difference_for_forecast(y: np.ndarray, order: SarimaOrder) -> np.ndarray:
    # a history of exactly d + period*D values leaves an empty differenced
    # series, which is still enough for pure random-walk forecasts
    shift = order.d + order.period * order.D
    if len(y) == shift:
        return np.empty(0)
    return seasonal_difference(y, order.d, order.D, order.period)


def forecast_one(model: SarimaModel, history) -> float:
    """One-step-ahead forecast on the original scale from the given history."""
    y = np.asarray(history, dtype=np.float64)
    order = model.order
    if len(y) < max(_min_history(order), 1):
        raise UnavailableLagError(
            f"history of {len(y)} values cannot supply the lags of order {order.label()}"
        )
    if np.any(np.isnan(y)):
        raise UnavailableLagError("history contains missing values")
    w = _difference_for_forecast(y, order)

    ar_lags, ar_coefs, ma_lags, ma_coefs = _expand_polys(order, model.ar, model.sar, model.ma, model.sma)
    eps = css_residuals(w, ar_lags, ar_coefs, ma_lags, ma_coefs, model.intercept)

    t = len(w)
    w_hat = model.intercept
    for lag, coef in zip(ar_lags, ar_coefs):
        if t - lag >= 0:
            w_hat -= coef * w[t - lag]  # coefs are stored on the observation side
    for lag, coef in zip(ma_lags, ma_coefs):
        if t - lag >= 0:
            w_hat += coef * eps[t - lag]

    return float(w_hat + _difference_offset(y, order))


def _difference_offset(y: np.ndarray, order: SarimaOrder) -> float:
    s = order.period
    if order.d == 0 and order.D == 0:
        return 0.0
    if order.d == 1 and order.D == 0:
        return y[-1]
    if order.d == 0 and order.D == 1:
        return y[-s]
    return y[-1] + y[-s] - y[-s - 1]


def forecast_series(model: SarimaModel, values) -> np.ndarray:
    """One-step forecasts for every index of ``values`` in a single causal pass.

    Entry t predicts values[t] from values[:t]; entries whose lags are not
    available are NaN.  Identical to calling forecast_one per index.
    """
    y = np.asarray(values, dtype=np.float64)
    order = model.order
    out = np.full(len(y), np.nan)
    start = max(_min_history(order), 1)
    if len(y) <= start:
        return out
    w = _difference_for_forecast(y, order)
    ar_lags, ar_coefs, ma_lags, ma_coefs = _expand_polys(order, model.ar, model.sar, model.ma, model.sma)
    eps = css_residuals(w, ar_lags, ar_coefs, ma_lags, ma_coefs, model.intercept)
    shift = order.d + order.period * order.D
    pred_w = w - eps  # eps[t] = w[t] - prediction(t | t-1)
    for t in range(start, len(y)):
        offset = _difference_offset(y[:t], order)
        out[t] = pred_w[t - shift] + offset
    return out


DEFAULT_GRID = {
    "p": (0, 1, 2),
    "d": (0, 1),
    "q": (0, 1, 2),
    "P": (0, 1),
    "D": (0, 1),
    "Q": (0, 1),
}


@dataclass
class GridEntry:
    order: SarimaOrder
    model: SarimaModel
    training_rmse: float
    training_mae: float


def grid_orders(grid: dict | None = None) -> list[SarimaOrder]:
    g = dict(DEFAULT_GRID)
    if grid:
        g.update(grid)
    return [
        SarimaOrder(p, d, q, P, D, Q)
        for p, d, q, P, D, Q in itertools.product(g["p"], g["d"], g["q"], g["P"], g["D"], g["Q"])
    ]


def grid_search(values, grid: dict | None = None, config: FitConfig = FitConfig()):
    """Fit every order in the grid; rank by training RMSE, ties to smaller models.

    Returns (entries, failures): entries sorted best-first with diverged fits
    last, failures as a list of (order, error message).
    """
    orders = grid_orders(grid)
    if not orders:
        raise GridSearchError("empty order grid")
    entries, failures = [], []
    for order in orders:
        try:
            model = fit_css(values, order, config)
        except ConvergenceError as exc:
            failures.append((order, str(exc)))
            continue
        except (ConditioningError, SeriesLengthError) as exc:
            failures.append((order, str(exc)))
            continue
        entries.append(GridEntry(order, model, model.training_rmse, model.training_mae))
    if not entries:
        raise GridSearchError(f"all {len(orders)} grid fits failed; first: {failures[0][1]}")
    entries.sort(
        key=lambda e: (
            e.model.diverged,
            e.training_rmse,
            e.order.parameter_count,
            (e.order.p, e.order.d, e.order.q, e.order.P, e.order.D, e.order.Q),
        )
    )
    return entries, failures
