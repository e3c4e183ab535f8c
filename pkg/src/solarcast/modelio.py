"""Model serialization: sectioned key-value text, exact round trip at full float precision."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ann import MlpConfig, MlpModel
from .errors import ParseError
from .linmod import DesignSpec, LinearModel
from .sarima import SarimaModel, SarimaOrder


def _fmt(value) -> str:
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, np.ndarray):
        return ",".join(repr(float(v)) for v in value.reshape(-1))
    if value is None:
        return ""
    return str(value)


def _write_kv(path, section: str, items: dict) -> None:
    lines = [f"[{section}]"]
    for key, value in items.items():
        lines.append(f"{key} = {_fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n")


def _read_kv(path) -> tuple[str, dict]:
    text = Path(path).read_text()
    section = None
    items = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            if section is not None:
                raise ParseError("model files hold a single section", line=line_no)
            section = line[1:-1]
            continue
        if section is None or "=" not in line:
            raise ParseError(f"unexpected line {line!r}", line=line_no)
        key, _, value = line.partition("=")
        items[key.strip()] = value.strip()
    if section is None:
        raise ParseError("missing section header", line=1)
    return section, items


def _floats(raw: str) -> np.ndarray:
    if not raw:
        return np.array([], dtype=np.float64)
    return np.array([float(v) for v in raw.split(",")], dtype=np.float64)


def save_sarima(model: SarimaModel, path) -> None:
    o = model.order
    _write_kv(path, "sarima", {
        "order": f"{o.p},{o.d},{o.q},{o.P},{o.D},{o.Q}",
        "period": o.period,
        "intercept": model.intercept,
        "ar": model.ar,
        "ma": model.ma,
        "sar": model.sar,
        "sma": model.sma,
        "training_rmse": model.training_rmse,
        "training_mae": model.training_mae,
        "n_obs": model.n_obs,
        "diverged": model.diverged,
    })


def save_linear(model: LinearModel, path) -> None:
    spec = model.spec
    _write_kv(path, "linear", {
        "family": spec.family if spec else "",
        "order": spec.order if spec else "",
        "month": spec.month if spec else "",
        "data_filter": spec.data_filter if spec else "all_hours",
        "include_intercept": spec.include_intercept if spec else False,
        "columns": "|".join(model.columns),
        "coefficients": model.coefficients,
        "training_rmse": model.training_rmse,
        "training_mae": model.training_mae,
        "n_rows": model.n_rows,
    })


def save_mlp(model: MlpModel, path) -> None:
    c = model.config
    _write_kv(path, "mlp", {
        "hidden_units": c.hidden_units,
        "learning_rate": c.learning_rate,
        "momentum": c.momentum,
        "validation_fraction": c.validation_fraction,
        "max_epochs": c.max_epochs,
        "patience": c.patience,
        "seed": c.seed,
        "n_inputs": model.n_inputs,
        "target_scale": model.target_scale,
        "best_epoch": model.best_epoch,
        "input_min": model.input_min,
        "input_max": model.input_max,
        "w1": model.w1,
        "b1": model.b1,
        "w2": model.w2,
        "b2": model.b2,
    })


def load_model(path):
    """Load any serialized model; returns a SarimaModel, LinearModel or MlpModel."""
    section, items = _read_kv(path)
    if section == "sarima":
        p, d, q, sp, sd, sq = (int(v) for v in items["order"].split(","))
        return SarimaModel(
            order=SarimaOrder(p, d, q, sp, sd, sq, period=int(items["period"])),
            ar=_floats(items["ar"]),
            ma=_floats(items["ma"]),
            sar=_floats(items["sar"]),
            sma=_floats(items["sma"]),
            intercept=float(items["intercept"]),
            training_rmse=float(items["training_rmse"]),
            training_mae=float(items["training_mae"]),
            n_obs=int(items["n_obs"]),
            diverged=items["diverged"] == "true",
        )
    if section == "linear":
        spec = None
        if items["family"]:
            spec = DesignSpec(
                family=items["family"],
                order=int(items["order"]) if items["order"] else None,
                month=int(items["month"]) if items["month"] else None,
                data_filter=items["data_filter"],
                include_intercept=items["include_intercept"] == "true",
            )
        return LinearModel(
            spec=spec,
            columns=items["columns"].split("|") if items["columns"] else [],
            coefficients=_floats(items["coefficients"]),
            training_rmse=float(items["training_rmse"]),
            training_mae=float(items["training_mae"]),
            n_rows=int(items["n_rows"]),
        )
    if section == "mlp":
        config = MlpConfig(
            hidden_units=int(items["hidden_units"]),
            learning_rate=float(items["learning_rate"]),
            momentum=float(items["momentum"]),
            validation_fraction=float(items["validation_fraction"]),
            max_epochs=int(items["max_epochs"]),
            patience=int(items["patience"]),
            seed=int(items["seed"]),
        )
        h, width = config.hidden_units, int(items["n_inputs"])
        return MlpModel(
            config=config,
            input_min=_floats(items["input_min"]),
            input_max=_floats(items["input_max"]),
            w1=_floats(items["w1"]).reshape(h, width),
            b1=_floats(items["b1"]),
            w2=_floats(items["w2"]),
            b2=float(items["b2"]),
            best_epoch=int(items["best_epoch"]),
            target_scale=float(items["target_scale"]),
        )
    raise ParseError(f"unknown model section {section!r}")


def save_model(model, path) -> None:
    if isinstance(model, SarimaModel):
        save_sarima(model, path)
    elif isinstance(model, LinearModel):
        save_linear(model, path)
    elif isinstance(model, MlpModel):
        save_mlp(model, path)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
