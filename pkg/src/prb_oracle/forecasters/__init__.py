"""The four PRB-load estimators behind one fit/predict contract."""

from .base import (
    MODEL_KINDS,
    PROBABILISTIC_KINDS,
    ForecastError,
    ForecasterConfig,
    ForecastResult,
    TrainedModel,
    TrainingDiverged,
    calendar_features,
    fit,
    forecast_quantile,
    load_model,
    predict,
    save_model,
)

__all__ = [
    "MODEL_KINDS",
    "PROBABILISTIC_KINDS",
    "ForecastError",
    "ForecasterConfig",
    "ForecastResult",
    "TrainedModel",
    "TrainingDiverged",
    "calendar_features",
    "fit",
    "forecast_quantile",
    "load_model",
    "predict",
    "save_model",
]
