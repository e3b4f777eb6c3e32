"""RKHS Bayesian functional regression with a reversible-jump ensemble sampler."""

from ._rjfr import (
    ChainStore,
    Dataset,
    Grid,
    ParamState,
    PriorConfig,
    RelabeledChains,
    SamplerConfig,
    generate_dataset,
    gram_matrix,
    half_sample_mode,
    kernel_eval,
    log_likelihood,
    log_posterior,
    metrics,
    p_posterior,
    predict,
    relabel,
    run_experiment,
    run_sampler,
    sample_gp,
    snap_to_grid,
    tempered_log_posterior,
    trimmed_mean,
)

__all__ = [
    "ChainStore",
    "Dataset",
    "Grid",
    "ParamState",
    "PriorConfig",
    "RelabeledChains",
    "SamplerConfig",
    "generate_dataset",
    "gram_matrix",
    "half_sample_mode",
    "kernel_eval",
    "log_likelihood",
    "log_posterior",
    "metrics",
    "p_posterior",
    "predict",
    "relabel",
    "run_experiment",
    "run_sampler",
    "sample_gp",
    "snap_to_grid",
    "tempered_log_posterior",
    "trimmed_mean",
]

__version__ = "0.1.0"
