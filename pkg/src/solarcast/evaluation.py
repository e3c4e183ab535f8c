"""Daytime error metrics, train/test split protocols, and model comparison reports.

Metrics are always computed over daytime hours of the irradiance scale;
forecasts made on the clearness index are converted back to irradiance first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import ann as ann_mod
from .baseline import simple_forecast_series
from .errors import (
    CoverageError,
    EmptyEvaluationError,
    MetricUndefinedError,
    SolarcastError,
    SplitSizeError,
)
from .ingest import HourlySeries
from .linmod import DesignSpec, build_design, ols_fit, predict_rows
from .ann import MlpConfig
from .sarima import FitConfig, SarimaOrder, fit_css, forecast_series


@dataclass(frozen=True)
class MetricSet:
    mae: float
    rmse: float
    cvrmse: float
    r2: float
    n_hours: int


def compute_metrics(predicted, observed, daytime) -> MetricSet:
    """MAE/RMSE/CVRMSE/R^2 over the daytime hours of equally long sequences."""
    pred = np.asarray(predicted, dtype=np.float64)
    obs = np.asarray(observed, dtype=np.float64)
    day = np.asarray(daytime, dtype=bool)
    if not (len(pred) == len(obs) == len(day)):
        raise ValueError("predicted, observed and daytime must have equal lengths")
    pred, obs = pred[day], obs[day]
    if len(obs) == 0:
        raise EmptyEvaluationError("no daytime hours to evaluate")

    err = pred - obs
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err**2)))
    mean_obs = float(np.mean(obs))
    if mean_obs == 0.0:
        raise MetricUndefinedError("CVRMSE undefined: mean observed irradiance is zero")
    cvrmse = rmse / mean_obs
    sse = float(np.sum(err**2))
    sst = float(np.sum((obs - mean_obs) ** 2))
    if sst > 0.0:
        r2 = 1.0 - sse / sst
    else:
        r2 = 1.0 if sse == 0.0 else float("-inf")

    assert mae <= rmse * (1.0 + 1e-12) + 1e-12, "power-mean inequality violated"
    assert abs(cvrmse * mean_obs - rmse) <= 1e-12 * max(1.0, rmse)
    return MetricSet(mae=mae, rmse=rmse, cvrmse=cvrmse, r2=r2, n_hours=int(len(obs)))


def _mean_metrics(parts: list[MetricSet]) -> MetricSet:
    return MetricSet(
        mae=float(np.mean([p.mae for p in parts])),
        rmse=float(np.mean([p.rmse for p in parts])),
        cvrmse=float(np.mean([p.cvrmse for p in parts])),
        r2=float(np.mean([p.r2 for p in parts])),
        n_hours=int(sum(p.n_hours for p in parts)),
    )


# -- split plans ----------------------------------------------------------------------


@dataclass(frozen=True)
class Fold:
    label: str
    train: np.ndarray  # series hour indices
    test: np.ndarray


@dataclass(frozen=True)
class SplitPlan:
    kind: str  # "holdout_years" | "monthly_3w1w" | "kfold"
    folds: tuple


def split_holdout_years(series: HourlySeries, train_years, test_year: int) -> SplitPlan:
    """Assign rows by calendar year: listed years train, ``test_year`` tests."""
    years = series.year()
    train_years = tuple(int(y) for y in train_years)
    for y in (*train_years, int(test_year)):
        if not np.any(years == y):
            raise CoverageError(f"year {y} not present in series")
    train = np.nonzero(np.isin(years, train_years))[0]
    test = np.nonzero(years == int(test_year))[0]
    return SplitPlan("holdout_years", (Fold("test", train, test),))


def _month_fold(series: HourlySeries, month: int) -> Fold:
    months = series.month()
    days = series.day_of_month()
    in_month = months == month
    if not np.any(in_month):
        raise CoverageError(f"no data for month {month}")
    covered_days = np.unique(days[in_month])
    if len(covered_days) < 22:
        raise CoverageError(f"month {month} covers {len(covered_days)} days; need >= 22")
    train = np.nonzero(in_month & (days <= 21))[0]
    test = np.nonzero(in_month & (days >= 22))[0]
    return Fold(f"month_{month:02d}", train, test)


def split_monthly_3w1w(series: HourlySeries, month: int) -> SplitPlan:
    """Days 1-21 of the month train, day 22 onward tests."""
    return SplitPlan("monthly_3w1w", (_month_fold(series, month),))


def split_monthly_all(series: HourlySeries, months=range(1, 13)) -> SplitPlan:
    """One 3-weeks-train / last-week-test fold per requested month."""
    return SplitPlan("monthly_3w1w", tuple(_month_fold(series, m) for m in months))


def kfold(rows, k: int = 10, seed: int = 0, blocked: bool = False) -> SplitPlan:
    """Seeded random partition of ``rows`` into k near-equal folds.

    ``blocked=True`` keeps rows in order (contiguous blocks) instead of
    shuffling; the shuffled variant is the default protocol.
    """
    rows = np.asarray(rows, dtype=np.int64)
    n = len(rows)
    if n < k:
        raise SplitSizeError(f"{n} rows cannot form {k} folds")
    order = rows.copy() if blocked else np.random.default_rng(seed).permutation(rows)
    base, rem = divmod(n, k)
    folds = []
    offset = 0
    for i in range(k):
        size = base + (1 if i < rem else 0)
        chunk = np.sort(order[offset : offset + size])
        train = np.setdiff1d(rows, chunk, assume_unique=False)
        folds.append(Fold(f"fold_{i + 1:02d}", train, chunk))
        offset += size
    # folds must partition the row universe
    pooled = np.sort(np.concatenate([f.test for f in folds]))
    assert np.array_equal(pooled, np.sort(rows)), "k-fold tests do not partition the rows"
    return SplitPlan("kfold", tuple(folds))


# -- model comparison -----------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """One entry of a comparison run; fields beyond ``kind`` apply per family."""

    name: str
    kind: str  # "baseline" | "sarima" | "linear" | "ann"
    family: str | None = None
    order: int | None = None
    data_filter: str = "all_hours"
    include_intercept: bool = False
    scope: str = "annual"  # "monthly" fits one model per calendar month
    sarima_order: SarimaOrder | None = None
    variable: str = "I"
    mlp: MlpConfig | None = None

    def __post_init__(self):
        if self.kind not in ("baseline", "sarima", "linear", "ann"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.scope not in ("annual", "monthly"):
            raise ValueError(f"unknown scope {self.scope!r}")
        if self.kind == "linear":
            if self.family is None:
                raise ValueError("linear models need a family")
            if self.family == "LMX2M" and self.scope != "monthly":
                raise ValueError("LMX2M is monthly-only")
            if self.family == "LMX2" and self.scope != "annual":
                raise ValueError("LMX2 is annual-only")
        if self.kind == "sarima" and self.sarima_order is None:
            raise ValueError("sarima models need an order")
        if self.variable not in ("I", "k"):
            raise ValueError("variable must be 'I' or 'k'")


@dataclass
class EvalReport:
    plan_kind: str
    metrics: dict  # model name -> split label -> MetricSet
    failures: dict  # model name -> message
    residuals: dict  # model name -> (timestamps, observed, predicted, daytime)


def _design_spec(spec: ModelSpec, month: int | None) -> DesignSpec:
    family = spec.family if spec.kind == "linear" else ("LMX2M" if month is not None else "LMX2")
    return DesignSpec(
        family=family,
        order=spec.order,
        month=month,
        data_filter=spec.data_filter,
        include_intercept=spec.include_intercept,
    )


def _eval_baseline(series, spec, plan, ctx):
    preds = simple_forecast_series(series)
    out = []
    for fold in plan.folds:
        sel = fold.test[np.isfinite(preds[fold.test]) & np.isfinite(ctx["irr"][fold.test])]
        out.append((fold.label, sel, preds[sel]))
    return out


def _eval_sarima(series, spec, plan, ctx):
    if plan.kind == "kfold":
        raise SolarcastError("SARIMA fitting needs contiguous history; k-fold plans are not supported")
    values = ctx["irr"] if spec.variable == "I" else ctx["k"]
    if np.any(np.isnan(values)):
        raise SolarcastError("series has unfilled gaps; SARIMA evaluation needs a complete series")
    out = []
    for fold in plan.folds:
        if len(fold.train) == 0 or np.any(np.diff(fold.train) != 1):
            raise SolarcastError(f"fold {fold.label}: SARIMA needs a contiguous training block")
        model = fit_css(values[fold.train], spec.sarima_order, ctx["fit_config"])
        preds = forecast_series(model, values)
        sel = fold.test[np.isfinite(preds[fold.test]) & np.isfinite(ctx["irr"][fold.test])]
        pred_vals = preds[sel]
        if spec.variable == "k":
            pred_vals = np.clip(pred_vals, 0.0, 0.85) * ctx["i0"][sel]
        out.append((fold.label, sel, pred_vals))
    return out


def _eval_linear(series, spec, plan, ctx):
    month_list = range(1, 13) if spec.scope == "monthly" else [None]
    out = []
    fitted_any = False
    for month in month_list:
        try:
            design = build_design(series, _design_spec(spec, month))
        except SolarcastError:
            continue
        for fold in plan.folds:
            tr = np.isin(design.row_indices, fold.train)
            te = np.isin(design.row_indices, fold.test)
            if not np.any(te):
                continue
            if np.count_nonzero(tr) < len(design.columns):
                continue
            model = ols_fit(design.matrix[tr], design.target[tr], design.columns)
            preds = predict_rows(model, design.matrix[te])
            out.append((fold.label, design.row_indices[te], preds))
            fitted_any = True
    if not fitted_any:
        raise SolarcastError("no fold produced a usable fit")
    return out


def _eval_ann(series, spec, plan, ctx):
    if spec.scope != "annual":
        raise SolarcastError("the network uses the annual LMX2 input set; monthly scope is not supported")
    design = build_design(series, _design_spec(spec, None))
    config = spec.mlp if spec.mlp is not None else MlpConfig()
    out = []
    for fold in plan.folds:
        tr = np.isin(design.row_indices, fold.train)
        te = np.isin(design.row_indices, fold.test)
        if not np.any(te) or not np.any(tr):
            continue
        model = ann_mod.train(config, design.matrix[tr], design.target[tr])
        preds = ann_mod.forward_batch(model, design.matrix[te])
        out.append((fold.label, design.row_indices[te], preds))
    if not out:
        raise SolarcastError("no fold produced a usable fit")
    return out


_EVALUATORS = {
    "baseline": _eval_baseline,
    "sarima": _eval_sarima,
    "linear": _eval_linear,
    "ann": _eval_ann,
}


def compare_models(series: HourlySeries, specs, plan: SplitPlan,
                   fit_config: FitConfig = FitConfig()) -> EvalReport:
    """Fit every spec per the plan, evaluate on test rows, and report metrics.

    The simple-forecast baseline is always included.  Models that fail keep the
    report alive: their error lands in ``failures`` and the survivors are
    reported normally.
    """
    specs = list(specs)
    if not any(s.kind == "baseline" for s in specs):
        specs.insert(0, ModelSpec(name="simple_forecast", kind="baseline"))

    ctx = {
        "irr": series.irradiance,
        "i0": series.extraterrestrial(),
        "fit_config": fit_config,
    }
    ctx["k"] = series.clearness()
    daytime = series.daytime()
    months = series.month()

    metrics, failures, residuals = {}, {}, {}
    for spec in specs:
        try:
            fold_preds = _EVALUATORS[spec.kind](series, spec, plan, ctx)
            labels, resid = _assemble(series, spec, plan, fold_preds, ctx["irr"], daytime, months)
        except SolarcastError as exc:
            failures[spec.name] = str(exc)
            continue
        metrics[spec.name] = labels
        residuals[spec.name] = resid
    return EvalReport(plan.kind, metrics, failures, residuals)


def _assemble(series, spec, plan, fold_preds, irr, daytime, months):
    if not fold_preds:
        raise EmptyEvaluationError("no test predictions produced")
    all_idx = np.concatenate([idx for _, idx, _ in fold_preds])
    all_pred = np.concatenate([p for _, _, p in fold_preds])
    order = np.argsort(all_idx, kind="stable")
    all_idx, all_pred = all_idx[order], all_pred[order]

    labels = {"overall": compute_metrics(all_pred, irr[all_idx], daytime[all_idx])}

    monthly_model = spec.scope == "monthly"
    if plan.kind == "monthly_3w1w" or monthly_model:
        month_sets = []
        for m in range(1, 13):
            sel = months[all_idx] == m
            if not np.any(sel):
                continue
            try:
                ms = compute_metrics(all_pred[sel], irr[all_idx[sel]], daytime[all_idx[sel]])
            except (EmptyEvaluationError, MetricUndefinedError):
                continue
            labels[f"month_{m:02d}"] = ms
            month_sets.append(ms)
        if month_sets:
            labels["average"] = _mean_metrics(month_sets)
    if plan.kind == "kfold" and not monthly_model:
        for label, idx, pred in fold_preds:
            try:
                labels[label] = compute_metrics(pred, irr[idx], daytime[idx])
            except (EmptyEvaluationError, MetricUndefinedError):
                continue

    resid = (
        series.timestamps[all_idx],
        irr[all_idx],
        all_pred,
        daytime[all_idx],
    )
    return labels, resid


# -- report emission ------------------------------------------------------------------


def report_json(report: EvalReport) -> str:
    payload = {
        "plan": report.plan_kind,
        "models": {
            name: {
                label: {
                    "mae": ms.mae,
                    "rmse": ms.rmse,
                    "cvrmse": ms.cvrmse,
                    "r2": ms.r2,
                    "n_hours": ms.n_hours,
                }
                for label, ms in sorted(report.metrics[name].items())
            }
            for name in sorted(report.metrics)
        },
        "failures": dict(sorted(report.failures.items())),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_text(report: EvalReport) -> str:
    lines = [f"plan: {report.plan_kind}"]
    header = f"{'model':<24} {'split':<10} {'MAE':>8} {'RMSE':>8} {'CVRMSE':>8} {'R2':>8} {'hours':>6}"
    lines.append(header)
    lines.append("-" * len(header))
    for name in sorted(report.metrics):
        for label, ms in sorted(report.metrics[name].items()):
            lines.append(
                f"{name:<24} {label:<10} {ms.mae:>8.2f} {ms.rmse:>8.2f} "
                f"{ms.cvrmse:>8.4f} {ms.r2:>8.4f} {ms.n_hours:>6d}"
            )
    for name in sorted(report.failures):
        lines.append(f"{name:<24} FAILED: {report.failures[name]}")
    return "\n".join(lines) + "\n"


def residual_csv(report: EvalReport, name: str) -> str:
    ts, obs, pred, day = report.residuals[name]
    lines = ["timestamp,observed,predicted,residual,daytime"]
    for i in range(len(ts)):
        lines.append(
            f"{ts[i]},{float(obs[i])!r},{float(pred[i])!r},{float(obs[i] - pred[i])!r},{int(day[i])}"
        )
    return "\n".join(lines) + "\n"
