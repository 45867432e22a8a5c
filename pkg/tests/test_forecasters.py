"""Estimator contracts: shapes, determinism, scaling, losses, checkpoints."""

from datetime import datetime

import numpy as np
import pytest

from prb_oracle import nncore as nn
from prb_oracle.forecasters import (
    MODEL_KINDS,
    ForecastError,
    ForecasterConfig,
    ForecastResult,
    calendar_features,
    fit,
    forecast_quantile,
    load_model,
    predict,
    save_model,
)
from prb_oracle.forecasters import deepar, lstm, sff, transformer
from prb_oracle.likelihoods import nll_loss, project_gaussian
from prb_oracle.traces import PrbSeries, TraceConfig, generate_synthetic

MODULES = {"sff": sff, "deepar": deepar, "transformer": transformer, "lstm": lstm}

TINY = dict(context_len=6, horizon=3, epochs=1, num_samples=8,
            hidden=(8, 8), rnn_layers=2, rnn_cells=8,
            model_dim=8, ff_scale=2, heads=2, blocks=1)


def tiny_config(kind, **overrides):
    return ForecasterConfig(kind=kind, **{**TINY, **overrides})


def short_series(hours=60, seed=0, constant=None):
    if constant is not None:
        values = np.full(hours, float(constant))
    else:
        values = generate_synthetic(TraceConfig(weeks=1, seed=seed)).values[:hours]
    return PrbSeries(datetime(2024, 1, 1), values, 160)


# ---------------------------------------------------------------------------
# configuration + quantiles
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ForecastError, match="unknown model kind"):
        ForecasterConfig(kind="gru")
    with pytest.raises(ForecastError, match="batch_size"):
        ForecasterConfig(kind="sff", batch_size=2)
    with pytest.raises(ForecastError, match="positive"):
        ForecasterConfig(kind="sff", horizon=0)
    with pytest.raises(ForecastError, match="divisible"):
        ForecasterConfig(kind="transformer", model_dim=30, heads=8)


def test_config_dict_round_trip():
    cfg = ForecasterConfig(kind="sff", hidden=(16, 8), seed=5)
    assert ForecasterConfig.from_dict(cfg.to_dict()) == cfg


def test_forecast_quantile_linear_interpolation():
    result = ForecastResult(samples=np.array([[0.0], [10.0]]), origin=0)
    assert forecast_quantile(result, 0.5)[0] == 5.0
    assert forecast_quantile(result, 0.25)[0] == 2.5


def test_forecast_quantile_median_of_odd_column():
    col = np.array([[3.0], [1.0], [7.0]])
    assert forecast_quantile(ForecastResult(samples=col, origin=0), 0.5)[0] == 3.0


def test_forecast_quantile_monotone_in_q():
    rng = np.random.default_rng(0)
    result = ForecastResult(samples=rng.normal(50, 20, size=(100, 24)), origin=0)
    levels = np.linspace(0.05, 0.95, 19)
    curves = [forecast_quantile(result, q) for q in levels]
    for lo, hi in zip(curves[:-1], curves[1:]):
        assert np.all(lo <= hi)


def test_forecast_quantile_rejects_bad_q():
    result = ForecastResult(samples=np.zeros((2, 2)), origin=0)
    for q in (0.0, 1.0, -1.0):
        with pytest.raises(ForecastError):
            forecast_quantile(result, q)


def test_calendar_features_wrap():
    anchor = datetime(2024, 1, 1, 22)  # Monday 22:00
    feats = calendar_features(anchor, np.arange(4))
    assert np.allclose(feats[:, 0] * 23, [22, 23, 0, 1])
    assert np.allclose(feats[:, 1] * 6, [0, 0, 1, 1])
    back = calendar_features(datetime(2024, 1, 8), np.array([-1]))  # Sunday 23:00
    assert np.allclose(back[0] * [23, 6], [23, 6])


# ---------------------------------------------------------------------------
# fit/predict contracts (all four kinds)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_epochs_zero_keeps_initialization(kind):
    cfg = tiny_config(kind, epochs=0)
    model = fit(cfg, short_series())
    fresh = MODULES[kind].build(cfg)
    assert sorted(model.params.names()) == sorted(fresh.names())
    for name in fresh.names():
        assert np.array_equal(model.params[name].data, fresh[name].data)
    assert model.final_train_loss is None


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_fit_deterministic_per_seed(kind):
    a = fit(tiny_config(kind, seed=6), short_series())
    b = fit(tiny_config(kind, seed=6), short_series())
    c = fit(tiny_config(kind, seed=8), short_series())
    for name in a.params.names():
        assert np.array_equal(a.params[name].data, b.params[name].data)
    assert any(not np.array_equal(a.params[n].data, c.params[n].data)
               for n in a.params.names())


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_predict_shapes_and_determinism(kind):
    model = fit(tiny_config(kind), short_series())
    ctx = short_series(seed=2).values[:6]
    r1 = predict(model, ctx)
    r2 = predict(model, ctx)
    expected_rows = 1 if kind == "lstm" else 8
    assert r1.samples.shape == (expected_rows, 3)
    assert np.array_equal(r1.samples, r2.samples)
    assert np.all(np.isfinite(r1.samples))


def test_default_config_shape_contract():
    # Untrained weights still honor the (num_samples, horizon) contract.
    series = generate_synthetic(TraceConfig(weeks=1))
    model = fit(ForecasterConfig(kind="sff", epochs=0), series)
    result = predict(model, series.values[:24])
    assert result.samples.shape == (100, 24)


def test_lstm_single_path_equals_point():
    model = fit(tiny_config("lstm"), short_series())
    result = predict(model, short_series(seed=3).values[:6])
    assert result.point is not None
    assert result.samples.shape == (1, 3)
    assert np.array_equal(result.samples[0], result.point)


def test_predict_rejects_wrong_context_length():
    model = fit(tiny_config("sff", epochs=0), short_series())
    with pytest.raises(ForecastError, match="context"):
        predict(model, np.ones(7))


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_constant_series_forecast_centers_on_level(kind):
    series = short_series(hours=84, constant=20.0)
    cfg = tiny_config(kind, context_len=12, horizon=6, epochs=8, lr=0.01,
                      num_samples=50)
    model = fit(cfg, series)
    result = predict(model, np.full(12, 20.0))
    median = forecast_quantile(result, 0.5)
    assert np.all(np.abs(median - 20.0) <= 2.0)


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_scale_field_tracks_series_magnitude(kind):
    base = PrbSeries(datetime(2024, 1, 1), short_series().values / 4.0, 160)
    doubled = PrbSeries(base.start_time, base.values * 2.0, 160)
    m1 = fit(tiny_config(kind, epochs=0), base)
    m2 = fit(tiny_config(kind, epochs=0), doubled)
    assert m2.scale == pytest.approx(2.0 * m1.scale, rel=1e-12)


def test_fit_requires_enough_data():
    tiny = PrbSeries(datetime(2024, 1, 1), np.ones(5) * 10.0, 160)
    with pytest.raises(Exception, match="too short"):
        fit(tiny_config("sff"), tiny)


def test_training_loss_recorded_and_finite():
    model = fit(tiny_config("deepar"), short_series())
    assert model.final_train_loss is not None
    assert np.isfinite(model.final_train_loss)


# ---------------------------------------------------------------------------
# model-specific structure
# ---------------------------------------------------------------------------

def test_deepar_loss_is_sum_of_per_step_gaussian_nll():
    cfg = tiny_config("deepar")
    params = deepar.build(cfg)
    series = short_series()
    ctx = series.values[:6] / 50.0
    tgt = series.values[6:9] / 50.0
    feats = {
        "ctx": calendar_features(series.start_time, np.arange(-6, 0)),
        "tgt": calendar_features(series.start_time, np.arange(3)),
    }
    total = deepar.loss(params, cfg, ctx, tgt, feats).item()

    # Independent recomputation: teacher-forced per-step heads, float nll.
    with nn.no_grad():
        values = np.concatenate([ctx, tgt])
        cov = np.vstack([feats["ctx"], feats["tgt"]])
        state = deepar._zero_state(cfg)
        dists = []
        for t in range(1, 9):
            top, state = deepar._step(params, cfg, deepar._input_at(values[t - 1], cov[t]), state)
            if t >= 6:
                raw = nn.add(nn.matmul(top, params["w_head"]), params["b_head"]).data[0]
                dists.append(project_gaussian(raw))
    assert total == pytest.approx(nll_loss(tgt, dists), abs=1e-9)


def test_sff_head_layout_matches_step_params():
    cfg = tiny_config("sff")
    params = sff.build(cfg)
    ctx = np.linspace(0.5, 1.5, 6)
    with nn.no_grad():
        dists = sff.step_params(params, cfg, ctx)
    assert len(dists) == 3
    assert all(d.sigma > 0 and d.nu > 2.0 for d in dists)


def test_transformer_decoder_causality():
    # Changing a later decoder input must not affect earlier outputs.
    cfg = tiny_config("transformer")
    params = transformer.build(cfg)
    ctx = np.linspace(0.8, 1.2, 6)
    feats = calendar_features(datetime(2024, 1, 1), np.arange(-6, 0))
    tgt_feats = calendar_features(datetime(2024, 1, 1), np.arange(3))
    with nn.no_grad():
        enc = transformer.encode(params, cfg, ctx, feats)
        base_inp = np.column_stack([[1.0, 1.1, 0.9], tgt_feats])
        bumped = base_inp.copy()
        bumped[2, 0] = 5.0
        raw_a = transformer.decode(params, cfg, base_inp, 6, enc).data
        raw_b = transformer.decode(params, cfg, bumped, 6, enc).data
    assert np.allclose(raw_a[:2], raw_b[:2])
    assert not np.allclose(raw_a[2], raw_b[2])


def test_positional_encoding_shape_and_range():
    pe = transformer.positional_encoding(10, 8)
    assert pe.shape == (10, 8)
    assert np.all(np.abs(pe) <= 1.0)
    assert not np.allclose(pe[0], pe[1])


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_model_checkpoint_round_trip(tmp_path, kind):
    model = fit(tiny_config(kind), short_series())
    save_model(model, tmp_path / "model")
    loaded = load_model(tmp_path / "model")
    assert loaded.config == model.config
    assert loaded.scale == model.scale
    assert loaded.train_end_time == model.train_end_time
    ctx = short_series(seed=4).values[:6]
    assert np.array_equal(predict(model, ctx).samples, predict(loaded, ctx).samples)
