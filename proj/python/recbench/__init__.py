"""Recommender benchmarking engine: data loading, evaluation protocols,
reference models, experiment runner and hyperparameter search."""

from ._core import (
    CheckpointError,
    Config,
    ConfigError,
    DataError,
    IoError,
    ParseError,
    RecbenchError,
    SchemaError,
    bench,
    dataset_info,
    grid_search,
    random_search,
    ranking_metrics,
    resume,
    run,
    topk,
)

__all__ = [
    "CheckpointError",
    "Config",
    "ConfigError",
    "DataError",
    "IoError",
    "ParseError",
    "RecbenchError",
    "SchemaError",
    "bench",
    "dataset_info",
    "grid_search",
    "random_search",
    "ranking_metrics",
    "resume",
    "run",
    "topk",
]
