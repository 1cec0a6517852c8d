"""Posterior computation and interrogation.

Two engines share one contract: the deterministic quadrature grid is the
correctness reference, and the gradient-based sampler is the scalable path
validated against it.
"""

from .diagnostics import Diagnostics, diagnostics, effective_sample_size, split_rhat
from .quadrature import (
    DEFAULT_QUANTILES,
    GridConfig,
    PosteriorGrid,
    PosteriorSummary,
    RiskResult,
    posterior_risk,
    quadrature_posterior,
    summarize,
    tail_probability,
)
from .sampler import ChainSet, SamplerConfig, mcmc_sample, ppc_replicates

__all__ = [
    "ChainSet",
    "DEFAULT_QUANTILES",
    "Diagnostics",
    "GridConfig",
    "PosteriorGrid",
    "PosteriorSummary",
    "RiskResult",
    "SamplerConfig",
    "diagnostics",
    "effective_sample_size",
    "mcmc_sample",
    "posterior_risk",
    "ppc_replicates",
    "quadrature_posterior",
    "split_rhat",
    "summarize",
    "tail_probability",
]
