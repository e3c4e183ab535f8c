"""Command-line entry point: ingest, fit, forecast, evaluate, synth.

Runs are driven by an INI config (sections: site, input, synth, split, output,
and one ``[model:NAME]`` section per model).  ``--seed`` and ``--out`` override
the corresponding config scalars.  Every command is deterministic given config
and seed.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

import numpy as np

from . import ann as ann_mod
from . import linmod, modelio, sarima
from .ann import MlpConfig, MlpModel
from .baseline import simple_forecast_series
from .errors import ConfigError, SolarcastError
from .evaluation import (
    ModelSpec,
    compare_models,
    kfold,
    report_json,
    report_text,
    residual_csv,
    split_holdout_years,
    split_monthly_3w1w,
    split_monthly_all,
)
from .geometry import SiteLocation
from .ingest import (
    HourlySeries,
    ingest_pipeline,
    parse_generic_csv,
    parse_tmy3,
    read_canonical,
    write_canonical,
)
from .linmod import DesignSpec, LinearModel, build_design, predict_rows
from .sarima import SarimaModel, SarimaOrder
from .synth import SynthConfig, generate


def _load_config(path) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    cfg.optionxform = str
    read = cfg.read(path)
    if not read:
        raise ConfigError(f"config file {path} not found")
    return cfg


def _site_from_config(cfg) -> SiteLocation:
    if not cfg.has_section("site"):
        raise ConfigError("config needs a [site] section")
    s = cfg["site"]
    return SiteLocation(
        latitude=s.getfloat("latitude"),
        longitude=s.getfloat("longitude"),
        utc_offset=s.getfloat("utc_offset"),
    )


def _out_dir(cfg, args) -> Path:
    out = args.out or (cfg.get("output", "dir", fallback="out"))
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _series_path(cfg, args) -> Path:
    if cfg.has_option("input", "path") and cfg.get("input", "format", fallback="canonical") == "canonical":
        return Path(cfg.get("input", "path"))
    return _out_dir(cfg, args) / "series.csv"


def _load_series(cfg, args) -> HourlySeries:
    fmt = cfg.get("input", "format", fallback="canonical")
    if fmt == "canonical":
        return read_canonical(_series_path(cfg, args))
    if fmt == "tmy3":
        return parse_tmy3(
            cfg.get("input", "path"),
            nominal_year=cfg.getint("input", "nominal_year", fallback=2005),
        )
    if fmt == "generic":
        column_map = {
            "timestamp": cfg.get("input", "timestamp_column"),
            "irradiance": cfg.get("input", "irradiance_column"),
            "cloud_cover": cfg.get("input", "cloud_cover_column"),
        }
        return parse_generic_csv(
            cfg.get("input", "path"),
            column_map,
            _site_from_config(cfg),
            cloud_cover_unit=cfg.get("input", "cloud_cover_unit", fallback="fraction"),
        )
    raise ConfigError(f"unknown input format {fmt!r}")


def _model_sections(cfg) -> dict:
    return {s.split(":", 1)[1]: cfg[s] for s in cfg.sections() if s.startswith("model:")}


def _selected_models(cfg) -> dict:
    available = _model_sections(cfg)
    raw = cfg.get("evaluate", "models", fallback="").strip()
    if not raw:
        return available
    selected = {}
    for name in (n.strip() for n in raw.split(",")):
        if name not in available:
            raise ConfigError(f"model {name!r} is not defined (no [model:{name}] section)")
        selected[name] = available[name]
    return selected


def _parse_order(raw: str) -> SarimaOrder:
    parts = [int(v) for v in raw.split(",")]
    if len(parts) != 6:
        raise ConfigError(f"sarima order needs 6 integers p,d,q,P,D,Q; got {raw!r}")
    return SarimaOrder(*parts)


def _mlp_config(section, seed_override) -> MlpConfig:
    seed = seed_override if seed_override is not None else section.getint("seed", fallback=0)
    return MlpConfig(
        hidden_units=section.getint("hidden_units", fallback=11),
        learning_rate=section.getfloat("learning_rate", fallback=0.2),
        momentum=section.getfloat("momentum", fallback=0.3),
        validation_fraction=section.getfloat("validation_fraction", fallback=0.1),
        max_epochs=section.getint("max_epochs", fallback=500),
        patience=section.getint("patience", fallback=20),
        seed=seed,
    )


def _model_spec(name, section, seed_override) -> ModelSpec:
    kind = section.get("kind")
    if kind is None:
        raise ConfigError(f"[model:{name}] needs a kind")
    common = dict(
        name=name,
        kind=kind,
        data_filter=section.get("data_filter", fallback="all_hours"),
        include_intercept=section.getboolean("include_intercept", fallback=False),
        scope=section.get("scope", fallback="annual"),
    )
    if kind == "linear":
        return ModelSpec(
            family=section.get("family"),
            order=section.getint("order", fallback=None),
            **common,
        )
    if kind == "sarima":
        raw = section.get("order", fallback=None)
        if raw is None:
            raise ConfigError(f"[model:{name}] sarima needs order = p,d,q,P,D,Q")
        return ModelSpec(
            sarima_order=_parse_order(raw),
            variable=section.get("variable", fallback="I"),
            **common,
        )
    if kind == "ann":
        return ModelSpec(mlp=_mlp_config(section, seed_override), **common)
    return ModelSpec(**common)


def _split_plan(cfg, series, seed_override):
    kind = cfg.get("split", "kind", fallback="kfold")
    if kind == "holdout_years":
        train_years = [int(v) for v in cfg.get("split", "train_years").split(",")]
        return split_holdout_years(series, train_years, cfg.getint("split", "test_year"))
    if kind == "monthly_3w1w":
        if cfg.has_option("split", "month"):
            return split_monthly_3w1w(series, cfg.getint("split", "month"))
        return split_monthly_all(series)
    if kind == "kfold":
        seed = seed_override if seed_override is not None else cfg.getint("split", "seed", fallback=0)
        return kfold(
            np.arange(len(series)),
            k=cfg.getint("split", "k", fallback=10),
            seed=seed,
            blocked=cfg.getboolean("split", "blocked", fallback=False),
        )
    raise ConfigError(f"unknown split kind {kind!r}")


def _gap_report_payload(series) -> list:
    return [
        {"channel": g.channel, "start": str(g.start), "length": g.length, "action": g.action}
        for g in series.gap_report
    ]


# -- commands -------------------------------------------------------------------------


def cmd_ingest(cfg, args) -> int:
    series = ingest_pipeline(_load_series(cfg, args))
    out = _out_dir(cfg, args)
    write_canonical(series, out / "series.csv")
    (out / "gap_report.json").write_text(
        json.dumps(_gap_report_payload(series), indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {out / 'series.csv'} ({len(series)} records, {len(series.gap_report)} gap spans)")
    return 0


def cmd_synth(cfg, args) -> int:
    site = _site_from_config(cfg) if cfg.has_section("site") else SynthConfig().site
    s = cfg["synth"] if cfg.has_section("synth") else {}

    def get(key, cast, default):
        return cast(s.get(key, default)) if key in s else default

    seed = args.seed if args.seed is not None else get("seed", int, 42)
    config = SynthConfig(
        site=site,
        year=get("year", int, 2013),
        n_hours=get("hours", int, 8760),
        seed=seed,
        cloud_base=get("cloud_base", float, 0.4),
        cloud_seasonal_amplitude=get("cloud_seasonal_amplitude", float, 0.2),
        cloud_sigma=get("cloud_sigma", float, 0.08),
        cloud_pull=get("cloud_pull", float, 0.02),
        noise_sigma=get("noise_sigma", float, 20.0),
    )
    series = generate(config)
    out = _out_dir(cfg, args)
    write_canonical(series, out / "series.csv")
    print(f"wrote {out / 'series.csv'} ({len(series)} synthetic records, seed {seed})")
    return 0


def cmd_fit(cfg, args) -> int:
    series = _load_series(cfg, args)
    out = _out_dir(cfg, args)
    train_series = series
    if cfg.get("split", "kind", fallback="") == "holdout_years":
        plan = _split_plan(cfg, series, args.seed)
        tr = plan.folds[0].train
        train_series = HourlySeries(
            series.site,
            series.timestamps[tr],
            series.irradiance[tr],
            series.cloud_cover[tr],
            series.quality[tr],
        )

    metrics = {}
    errors = {}
    produced = 0
    for name, section in _selected_models(cfg).items():
        try:
            produced += _fit_one(name, section, train_series, out, args.seed, metrics)
        except SolarcastError as exc:
            errors[name] = str(exc)
            print(f"fit {name}: FAILED: {exc}", file=sys.stderr)
    (out / "fit_metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n")
    for name, message in errors.items():
        metrics.setdefault(name, {"error": message})
    if produced == 0 and errors:
        return 1
    return 0


def _fit_one(name, section, series, out, seed_override, metrics) -> int:
    kind = section.get("kind")
    if kind == "baseline":
        metrics[name] = {"note": "persistence forecast has no parameters"}
        return 0
    if kind == "sarima":
        variable = section.get("variable", fallback="I")
        values = series.irradiance if variable == "I" else series.clearness()
        if section.getboolean("grid", fallback=False):
            grid = {}
            for key in ("p", "d", "q", "P", "D", "Q"):
                if section.get(f"grid_{key}", fallback=None):
                    grid[key] = tuple(int(v) for v in section.get(f"grid_{key}").split(","))
            entries, failures = sarima.grid_search(values, grid or None)
            lines = [f"{'order':<22} {'rmse':>12} {'mae':>12} {'params':>7} {'diverged':>9}"]
            for e in entries:
                lines.append(
                    f"{e.order.label():<22} {e.training_rmse:>12.4f} {e.training_mae:>12.4f} "
                    f"{e.order.parameter_count:>7d} {str(e.model.diverged):>9}"
                )
            for order, message in failures:
                lines.append(f"{order.label():<22} FAILED: {message}")
            (out / f"{name}_grid.txt").write_text("\n".join(lines) + "\n")
            best = entries[0].model
            modelio.save_model(best, out / f"{name}.model")
            metrics[name] = {"training_rmse": best.training_rmse, "order": best.order.label()}
            return 1
        model = sarima.fit_css(values, _parse_order(section.get("order")))
        modelio.save_model(model, out / f"{name}.model")
        metrics[name] = {"training_rmse": model.training_rmse, "order": model.order.label()}
        return 1
    if kind == "linear":
        scope = section.get("scope", fallback="annual")
        base = dict(
            family=section.get("family"),
            order=section.getint("order", fallback=None),
            data_filter=section.get("data_filter", fallback="all_hours"),
            include_intercept=section.getboolean("include_intercept", fallback=False),
        )
        if scope == "monthly":
            entry = {}
            months = sorted(set(series.month()))
            for m in months:
                spec = DesignSpec(month=int(m), **base)
                model = linmod.fit_design(series, spec)
                modelio.save_model(model, out / f"{name}_month_{m:02d}.model")
                entry[f"month_{m:02d}"] = {"training_rmse": model.training_rmse}
            metrics[name] = entry
            return 1
        spec = DesignSpec(**base)
        model = linmod.fit_design(series, spec)
        modelio.save_model(model, out / f"{name}.model")
        metrics[name] = {"training_rmse": model.training_rmse}
        return 1
    if kind == "ann":
        config = _mlp_config(section, seed_override)
        design = build_design(series, DesignSpec(family="LMX2", data_filter=section.get("data_filter", fallback="all_hours")))
        model = ann_mod.train(config, design.matrix, design.target)
        modelio.save_model(model, out / f"{name}.model")
        train_mse, val_mse = model.history[model.best_epoch - 1]
        metrics[name] = {"train_mse_scaled": train_mse, "val_mse_scaled": val_mse, "epochs": len(model.history)}
        return 1
    raise ConfigError(f"[model:{name}] has unknown kind {kind!r}")


def cmd_forecast(cfg, args) -> int:
    series = _load_series(cfg, args)
    out = _out_dir(cfg, args)
    model_path = args.model or cfg.get("forecast", "model", fallback=None)
    name = Path(model_path).stem if model_path else "baseline"
    if model_path is None or name == "baseline":
        preds = simple_forecast_series(series)
        idx = np.nonzero(np.isfinite(preds))[0]
        values = preds[idx]
    else:
        if not Path(model_path).exists():
            raise ConfigError(f"model file {model_path} does not exist")
        model = modelio.load_model(model_path)
        if isinstance(model, SarimaModel):
            preds = sarima.forecast_series(model, series.irradiance)
            idx = np.nonzero(np.isfinite(preds))[0]
            values = preds[idx]
        elif isinstance(model, LinearModel):
            design = build_design(series, model.spec)
            idx = design.row_indices
            values = predict_rows(model, design.matrix)
        elif isinstance(model, MlpModel):
            design = build_design(series, DesignSpec(family="LMX2"))
            idx = design.row_indices
            values = ann_mod.forward_batch(model, design.matrix)
        else:
            raise ConfigError(f"cannot forecast with {type(model).__name__}")
    path = out / f"forecast_{name}.csv"
    with open(path, "w") as fh:
        fh.write("timestamp,predicted\n")
        for i, v in zip(idx, values):
            fh.write(f"{series.timestamps[i]},{float(v)!r}\n")
    print(f"wrote {path} ({len(idx)} forecasts)")
    return 0


def cmd_evaluate(cfg, args) -> int:
    series = _load_series(cfg, args)
    out = _out_dir(cfg, args)
    plan = _split_plan(cfg, series, args.seed)
    specs = [_model_spec(name, section, args.seed) for name, section in _selected_models(cfg).items()]
    report = compare_models(series, specs, plan)

    (out / "report.json").write_text(report_json(report))
    (out / "report.txt").write_text(report_text(report))
    resid_dir = out / "residuals"
    resid_dir.mkdir(exist_ok=True)
    for name in sorted(report.residuals):
        (resid_dir / f"{name}.csv").write_text(residual_csv(report, name))
    print(report_text(report), end="")
    if report.failures and not report.metrics:
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="solarcast", description="Hour-ahead solar irradiance forecasting workbench")
    parser.add_argument("--config", required=False, help="INI config file")
    parser.add_argument("--seed", type=int, default=None, help="override config seeds")
    parser.add_argument("--out", default=None, help="override output directory")
    parser.add_argument("--model", default=None, help="model file for the forecast command")
    parser.add_argument("command", choices=["ingest", "fit", "forecast", "evaluate", "synth"])
    args = parser.parse_args(argv)

    handlers = {
        "ingest": cmd_ingest,
        "fit": cmd_fit,
        "forecast": cmd_forecast,
        "evaluate": cmd_evaluate,
        "synth": cmd_synth,
    }
    try:
        if args.config is None:
            raise ConfigError("--config is required")
        cfg = _load_config(args.config)
        return handlers[args.command](cfg, args)
    except SolarcastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
