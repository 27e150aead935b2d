"""Tensor algebra, TNN completion and generative traffic forecasting."""

from ._tubalcast import (
    Generator,
    LearnedOptimizer,
    TubalcastError,
    complete,
    energy_cdf,
    identity,
    infer,
    mae,
    nrmse,
    random_mask,
    synthetic_traffic,
    tnn,
    tproduct,
    tsvd,
    tsvt,
    ttranspose,
    tubal_rank,
)

__version__ = "0.1.0"
