"""Generalized logit-normal autoregressive models for bounded time series."""

from ._core import (
    ConfigError,
    DataError,
    EstimationError,
    EvaluationError,
    GlnarError,
    cdf,
    cli,
    crps,
    crps_gaussian,
    density,
    fit_batch,
    forecast,
    inverse_transform,
    mean,
    models,
    quantile,
    run_recursive,
    simulate,
    transform,
)

__all__ = [
    "ConfigError",
    "DataError",
    "EstimationError",
    "EvaluationError",
    "GlnarError",
    "cdf",
    "cli",
    "crps",
    "crps_gaussian",
    "density",
    "fit_batch",
    "forecast",
    "inverse_transform",
    "mean",
    "models",
    "quantile",
    "run_recursive",
    "simulate",
    "transform",
]

__version__ = "0.1.0"
