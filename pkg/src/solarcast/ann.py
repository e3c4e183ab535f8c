"""Feed-forward network: one sigmoid hidden layer, linear output, per-row backprop with momentum.

Inputs are min-max scaled to [0, 1], targets divided by the feasible irradiance
ceiling (1050 W/m^2).  Training shuffles rows each epoch with a seeded generator,
so runs are reproducible bit for bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._kernels import mlp_epoch
from .errors import ConfigError, ShapeMismatchError, TrainingDivergedError
from .ingest import IRRADIANCE_MAX

log = logging.getLogger(__name__)

TARGET_SCALE = IRRADIANCE_MAX


@dataclass(frozen=True)
class MlpConfig:
    hidden_units: int = 11
    learning_rate: float = 0.2
    momentum: float = 0.3
    validation_fraction: float = 0.1
    max_epochs: int = 500
    patience: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in [0, 1)")
        if self.max_epochs < 1 or self.patience < 1:
            raise ValueError("max_epochs and patience must be >= 1")


@dataclass
class MlpModel:
    config: MlpConfig
    input_min: np.ndarray
    input_max: np.ndarray
    w1: np.ndarray  # (hidden, inputs)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float
    history: list = field(default_factory=list)  # (train_mse, val_mse) per epoch
    best_epoch: int = 0
    target_scale: float = TARGET_SCALE

    @property
    def n_inputs(self) -> int:
        return self.w1.shape[1]

    @property
    def parameter_count(self) -> int:
        return self.w1.size + self.b1.size + self.w2.size + 1


def sigmoid(t):
    """Logistic function, stable for large |t| (no overflow)."""
    t_arr = np.asarray(t, dtype=np.float64)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    out = np.empty_like(t_arr)
    pos = t_arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t_arr[pos]))
    expt = np.exp(t_arr[~pos])
    out[~pos] = expt / (1.0 + expt)
    return float(out[0]) if scalar else out


def _scale_inputs(model_min, model_max, x):
    span = model_max - model_min
    safe = np.where(span > 0, span, 1.0)
    scaled = (x - model_min) / safe
    return np.clip(np.where(span > 0, scaled, 0.0), 0.0, 1.0)


def _forward_scaled(w1, b1, w2, b2, x_scaled):
    hidden = sigmoid(w1 @ x_scaled + b1)
    return float(w2 @ hidden + b2), hidden


def forward(model: MlpModel, row) -> float:
    """Network output in W/m^2, clamped to the feasible range."""
    x = np.asarray(row, dtype=np.float64)
    if x.shape != (model.n_inputs,):
        raise ShapeMismatchError(f"input width {x.shape} does not match model ({model.n_inputs},)")
    out, _ = _forward_scaled(model.w1, model.b1, model.w2, model.b2, _scale_inputs(model.input_min, model.input_max, x))
    return float(np.clip(out * model.target_scale, 0.0, IRRADIANCE_MAX))


def forward_batch(model: MlpModel, matrix) -> np.ndarray:
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_inputs:
        raise ShapeMismatchError(f"matrix shape {x.shape} does not match model width {model.n_inputs}")
    xs = _scale_inputs(model.input_min, model.input_max, x)
    hidden = sigmoid(xs @ model.w1.T + model.b1)
    out = hidden @ model.w2 + model.b2
    return np.clip(out * model.target_scale, 0.0, IRRADIANCE_MAX)


def _batch_mse(w1, b1, w2, b2, x_scaled, y_scaled) -> float:
    hidden = sigmoid(x_scaled @ w1.T + b1)
    out = hidden @ w2 + b2
    return float(np.mean((out - y_scaled) ** 2))


def train(config: MlpConfig, matrix, targets) -> MlpModel:
    """Train by seeded per-row backprop with momentum and validation-based early stopping.

    With a nonzero validation fraction the returned weights come from the best
    validation epoch; with zero, training runs to max_epochs and keeps the
    final weights.
    """
    x = np.ascontiguousarray(matrix, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or len(y) != x.shape[0]:
        raise ShapeMismatchError(f"matrix {x.shape} and targets {y.shape} do not align")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("features and targets must be finite")
    n, width = x.shape

    input_min = x.min(axis=0)
    input_max = x.max(axis=0)
    xs = _scale_inputs(input_min, input_max, x)
    ys = y / TARGET_SCALE

    rng = np.random.default_rng(config.seed)
    h = config.hidden_units
    param_count = h * (width + 1) + h + 1
    if n < 10 * param_count:
        log.warning("only %d rows for %d parameters; recommend >= %d", n, param_count, 10 * param_count)

    val_n = int(round(config.validation_fraction * n))
    if config.validation_fraction > 0 and val_n == 0:
        raise ConfigError(f"validation_fraction {config.validation_fraction} selects zero of {n} rows")
    perm = rng.permutation(n)
    val_idx, train_idx = perm[:val_n], perm[val_n:]
    if len(train_idx) == 0:
        raise ConfigError("no training rows left after the validation split")
    x_tr, y_tr = np.ascontiguousarray(xs[train_idx]), np.ascontiguousarray(ys[train_idx])
    x_val, y_val = xs[val_idx], ys[val_idx]

    w1 = rng.uniform(-0.5, 0.5, size=(h, width))
    b1 = rng.uniform(-0.5, 0.5, size=h)
    w2 = rng.uniform(-0.5, 0.5, size=h)
    b2 = np.array([rng.uniform(-0.5, 0.5)])
    vw1, vb1 = np.zeros_like(w1), np.zeros_like(b1)
    vw2, vb2 = np.zeros_like(w2), np.zeros_like(b2)

    history = []
    best = (np.inf, None, 0)  # (val_mse, weight snapshot, epoch)
    stall = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_idx)).astype(np.int64)
        sse = mlp_epoch(x_tr, y_tr, order, w1, b1, w2, b2, vw1, vb1, vw2, vb2,
                        config.learning_rate, config.momentum)
        train_mse = sse / len(train_idx)
        if not np.isfinite(train_mse):
            raise TrainingDivergedError(f"training loss became non-finite at epoch {epoch}", epoch=epoch)
        val_mse = _batch_mse(w1, b1, w2, b2, x_val, y_val) if val_n else float("nan")
        history.append((float(train_mse), float(val_mse)))
        if val_n:
            if val_mse < best[0]:
                best = (val_mse, (w1.copy(), b1.copy(), w2.copy(), float(b2[0])), epoch)
                stall = 0
            else:
                stall += 1
                if stall >= config.patience:
                    break

    if val_n and best[1] is not None:
        w1, b1, w2, b2_val = best[1]
        best_epoch = best[2]
    else:
        b2_val = float(b2[0])
        best_epoch = len(history)

    return MlpModel(
        config=config,
        input_min=input_min,
        input_max=input_max,
        w1=w1,
        b1=b1,
        w2=w2,
        b2=b2_val,
        history=history,
        best_epoch=best_epoch,
    )


def loss_and_gradients(model: MlpModel, row, target):
    """Scaled-space squared-error loss 0.5*(out - y)^2 and its analytic gradients."""
    x = _scale_inputs(model.input_min, model.input_max, np.asarray(row, dtype=np.float64))
    y = float(target) / model.target_scale
    out, hidden = _forward_scaled(model.w1, model.b1, model.w2, model.b2, x)
    err = out - y
    grad_hidden = (err * model.w2) * hidden * (1.0 - hidden)
    grads = {
        "w1": grad_hidden[:, None] * x[None, :],
        "b1": grad_hidden,
        "w2": err * hidden,
        "b2": np.array([err]),
    }
    return 0.5 * err * err, grads


def gradient_check(model: MlpModel, row, target, step: float = 1e-5) -> float:
    """Max relative gap between analytic and central-difference gradients."""
    _, grads = loss_and_gradients(model, row, target)
    x = _scale_inputs(model.input_min, model.input_max, np.asarray(row, dtype=np.float64))
    y = float(target) / model.target_scale

    def loss(w1, b1, w2, b2):
        out, _ = _forward_scaled(w1, b1, w2, b2, x)
        return 0.5 * (out - y) ** 2

    worst = 0.0
    params = {"w1": model.w1.copy(), "b1": model.b1.copy(), "w2": model.w2.copy(), "b2": np.array([model.b2])}
    for name, arr in params.items():
        flat = arr.reshape(-1)
        analytic = grads[name].reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + step
            hi = loss(params["w1"], params["b1"], params["w2"], float(params["b2"][0]))
            flat[i] = saved - step
            lo = loss(params["w1"], params["b1"], params["w2"], float(params["b2"][0]))
            flat[i] = saved
            numeric = (hi - lo) / (2.0 * step)
            rel = abs(analytic[i] - numeric) / max(abs(analytic[i]), abs(numeric), 1e-8)
            worst = max(worst, rel)
    return worst
