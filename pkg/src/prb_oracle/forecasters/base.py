"""Shared fit/predict contract for the four PRB-load estimators."""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .. import nncore
from ..nncore import ParameterSet, AdamState, adam_step, backward
from ..traces import PrbSeries, make_windows

MODEL_KINDS = ("sff", "deepar", "transformer", "lstm")
PROBABILISTIC_KINDS = ("sff", "deepar", "transformer")


class ForecastError(ValueError):
    """Invalid forecaster configuration or inputs."""


class TrainingDiverged(RuntimeError):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class ForecasterConfig:
    """Hyperparameters for one estimator; defaults mirror the benchmark setup."""

    kind: str
    context_len: int = 24
    horizon: int = 24
    epochs: int = 5
    batch_size: int = 1
    num_samples: int = 100
    hidden: tuple[int, ...] = (40, 40)  # sff
    rnn_layers: int = 2                 # deepar
    rnn_cells: int = 40                 # deepar + lstm
    model_dim: int = 32                 # transformer
    ff_scale: int = 4
    heads: int = 8
    blocks: int = 2
    lr: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ForecastError(f"unknown model kind {self.kind!r}, expected one of {MODEL_KINDS}")
        sizes = (self.context_len, self.horizon, self.num_samples, self.rnn_layers,
                 self.rnn_cells, self.model_dim, self.ff_scale, self.heads, self.blocks,
                 *self.hidden)
        if any(s < 1 for s in sizes):
            raise ForecastError("all size hyperparameters must be positive")
        if self.epochs < 0:
            raise ForecastError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size != 1:
            raise ForecastError("only batch_size=1 is supported")
        if self.model_dim % self.heads != 0:
            raise ForecastError(
                f"model_dim {self.model_dim} not divisible by heads {self.heads}"
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ForecasterConfig":
        d = dict(d)
        if "hidden" in d:
            d["hidden"] = tuple(d["hidden"])
        return cls(**d)


@dataclass(frozen=True)
class ForecastResult:
    """Monte Carlo representation of one window's predictive distribution.

    samples is (num_samples, horizon) in PRBs; deterministic models carry a
    single row and also expose it as `point`.
    """

    samples: np.ndarray
    origin: int
    point: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", s)
        if s.ndim != 2 or s.shape[0] < 1:
            raise ForecastError(f"samples must be (num_samples, horizon), got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ForecastError("forecast samples contain non-finite values")


@dataclass(frozen=True)
class TrainedModel:
    """Immutable snapshot of a fitted estimator."""

    config: ForecasterConfig
    params: ParameterSet
    scale: float
    start_time: datetime
    train_end_time: datetime
    final_train_loss: float | None


def calendar_features(anchor: datetime, offsets: np.ndarray) -> np.ndarray:
    """Hour-of-day/23 and day-of-week/6 for anchor + offset hours, shape (n, 2)."""
    base = anchor.weekday() * 24 + anchor.hour
    h = base + np.asarray(offsets, dtype=np.int64)
    hour = (h % 24) / 23.0
    dow = ((h // 24) % 7) / 6.0
    return np.stack([hour, dow], axis=1)


def _model_module(kind: str):
    from . import sff, deepar, transformer, lstm

    return {"sff": sff, "deepar": deepar, "transformer": transformer, "lstm": lstm}[kind]


def fit(config: ForecasterConfig, train: PrbSeries) -> TrainedModel:
    """Train one estimator on a PRB series.

    Runs `epochs` shuffled passes over all stride-1 windows at batch size 1,
    minimizing the model's likelihood loss (squared error for the lstm
    baseline). Inputs are divided by the training-series mean; deterministic
    per config.seed.
    """
    mod = _model_module(config.kind)
    windows = make_windows(train, config.context_len, config.horizon, stride=1)
    scale = float(train.values.mean())
    if scale <= 0.0:
        raise ForecastError("training series mean must be positive")
    params = mod.build(config)
    state = AdamState.for_params(params, lr=config.lr)
    shuffle_rng = np.random.default_rng([config.seed, 1])

    ctx_off = {w.t0_index: np.arange(w.t0_index - config.context_len, w.t0_index)
               for w in windows}
    final_loss = None
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(windows))
        epoch_loss = 0.0
        for wi in order:
            w = windows[wi]
            feats = {
                "ctx": calendar_features(train.start_time, ctx_off[w.t0_index]),
                "tgt": calendar_features(
                    train.start_time, np.arange(w.t0_index, w.t0_index + config.horizon)
                ),
            }
            loss = mod.loss(params, config, w.context / scale, w.target / scale, feats)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDiverged(
                    f"{config.kind}: non-finite loss {value} at epoch {epoch}, "
                    f"window t0={w.t0_index}"
                )
            grads = backward(loss, params)
            adam_step(params, grads, state)
            epoch_loss += value
        final_loss = epoch_loss / len(windows)
    params.freeze()
    end = train.start_time + timedelta(hours=len(train))
    return TrainedModel(
        config=config,
        params=params,
        scale=scale,
        start_time=train.start_time,
        train_end_time=end,
        final_train_loss=final_loss,
    )


def predict(
    model: TrainedModel,
    context: np.ndarray,
    start: datetime | None = None,
    rng: np.random.Generator | None = None,
    origin: int = 0,
) -> ForecastResult:
    """Forecast the horizon following `context`.

    `start` is the timestamp of the first predicted hour (defaults to the
    hour right after the training data, the natural continuation); it feeds
    the calendar covariates of the recurrent and attention models. With the
    default rng the result is a pure function of (model, context, start).
    """
    config = model.config
    context = np.asarray(context, dtype=np.float64)
    if context.shape != (config.context_len,):
        raise ForecastError(
            f"context shape {context.shape} != ({config.context_len},)"
        )
    if start is None:
        start = model.train_end_time
    if rng is None:
        rng = np.random.default_rng([config.seed, 2])
    feats = {
        "ctx": calendar_features(start, np.arange(-config.context_len, 0)),
        "tgt": calendar_features(start, np.arange(config.horizon)),
    }
    mod = _model_module(config.kind)
    with nncore.no_grad():
        result = mod.paths(model.params, config, context / model.scale, feats, rng)
    if config.kind == "lstm":
        point = result[0] * model.scale
        return ForecastResult(samples=point[None, :].copy(), origin=origin, point=point)
    return ForecastResult(samples=result * model.scale, origin=origin)


def forecast_quantile(result: ForecastResult, q: float) -> np.ndarray:
    """Per-timestep empirical quantile, linear interpolation at (n-1)q."""
    if not 0.0 < q < 1.0:
        raise ForecastError(f"quantile level must be in (0,1), got {q}")
    return np.quantile(result.samples, q, axis=0)


def save_model(model: TrainedModel, path_prefix: str | Path) -> None:
    """Write {prefix}.params.json (checkpoint) and {prefix}.model.json (sidecar)."""
    prefix = Path(path_prefix)
    nncore.save_checkpoint(model.params, prefix.with_suffix(".params.json"))
    sidecar = {
        "config": model.config.to_dict(),
        "scale": model.scale,
        "start_time": model.start_time.isoformat(),
        "train_end_time": model.train_end_time.isoformat(),
        "final_train_loss": model.final_train_loss,
    }
    prefix.with_suffix(".model.json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n"
    )


def load_model(path_prefix: str | Path) -> TrainedModel:
    prefix = Path(path_prefix)
    params = nncore.load_checkpoint(prefix.with_suffix(".params.json"))
    params.freeze()
    sidecar = json.loads(prefix.with_suffix(".model.json").read_text())
    return TrainedModel(
        config=ForecasterConfig.from_dict(sidecar["config"]),
        params=params,
        scale=float(sidecar["scale"]),
        start_time=datetime.fromisoformat(sidecar["start_time"]),
        train_end_time=datetime.fromisoformat(sidecar["train_end_time"]),
        final_train_loss=sidecar["final_train_loss"],
    )
