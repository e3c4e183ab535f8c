"""Serialized models must round-trip exactly at full float precision."""

import numpy as np
import pytest

from solarcast.ann import MlpConfig, MlpModel
from solarcast.linmod import DesignSpec, LinearModel
from solarcast.modelio import load_model, save_model
from solarcast.sarima import SarimaModel, SarimaOrder


def test_sarima_round_trip(tmp_path):
    model = SarimaModel(
        order=SarimaOrder(2, 0, 1, 1, 1, 1),
        ar=np.array([0.123456789012345678, -0.9876543210987654]),
        ma=np.array([1.0 / 3.0]),
        sar=np.array([0.1]),
        sma=np.array([-0.6000000000000001]),
        intercept=np.pi,
        training_rmse=43.21098765432101,
        training_mae=16.0,
        n_obs=5000,
    )
    path = tmp_path / "m.model"
    save_model(model, path)
    back = load_model(path)
    assert back.order == model.order
    assert np.array_equal(back.ar, model.ar)
    assert np.array_equal(back.ma, model.ma)
    assert np.array_equal(back.sar, model.sar)
    assert np.array_equal(back.sma, model.sma)
    assert back.intercept == model.intercept
    assert back.training_rmse == model.training_rmse


def test_linear_round_trip(tmp_path):
    model = LinearModel(
        spec=DesignSpec(family="LMX", order=2, month=3, data_filter="daytime_only"),
        columns=["i_lag1", "i_lag2", "i_lag24", "cc_diff1", "cc_diff2", "cc_diff24"],
        coefficients=np.array([0.5, 0.25, 0.1, -100.123456789012345, 3.0, -7.5]),
        training_rmse=12.345678901234567,
        training_mae=9.0,
        n_rows=400,
    )
    path = tmp_path / "lin.model"
    save_model(model, path)
    back = load_model(path)
    assert back.spec == model.spec
    assert back.columns == model.columns
    assert np.array_equal(back.coefficients, model.coefficients)
    assert back.training_rmse == model.training_rmse


def test_mlp_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    model = MlpModel(
        config=MlpConfig(hidden_units=3, learning_rate=0.2, momentum=0.3, seed=7),
        input_min=rng.uniform(-1, 0, 5),
        input_max=rng.uniform(1, 2, 5),
        w1=rng.normal(0, 1, (3, 5)),
        b1=rng.normal(0, 1, 3),
        w2=rng.normal(0, 1, 3),
        b2=float(rng.normal()),
        best_epoch=17,
    )
    path = tmp_path / "net.model"
    save_model(model, path)
    back = load_model(path)
    assert back.config == model.config
    assert np.array_equal(back.w1, model.w1)
    assert np.array_equal(back.b1, model.b1)
    assert np.array_equal(back.w2, model.w2)
    assert back.b2 == model.b2
    assert np.array_equal(back.input_min, model.input_min)


def test_serialized_file_rewrites_identically(tmp_path):
    model = LinearModel(
        spec=DesignSpec(family="LR"),
        columns=["i_lag24", "cc_diff24"],
        coefficients=np.array([0.9999999999999999, 1e-17]),
        training_rmse=1.0,
        training_mae=0.5,
        n_rows=10,
    )
    first = tmp_path / "a.model"
    second = tmp_path / "b.model"
    save_model(model, first)
    save_model(load_model(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_unknown_type_rejected(tmp_path):
    with pytest.raises(TypeError):
        save_model(object(), tmp_path / "x.model")
