"""MaxMachine binary latent feature model with type hierarchy."""

from ._core import (
    ConfigError,
    DataError,
    Error,
    LookupError,
    Model,
    ParseError,
    evaluate,
    roc_auc,
    simulate,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "LookupError",
    "Model",
    "ParseError",
    "evaluate",
    "roc_auc",
    "simulate",
]
