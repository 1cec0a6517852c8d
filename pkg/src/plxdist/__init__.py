"""Distance estimation from single noisy parallax measurements.

Inverting a parallax only works without measurement error; with error the
problem becomes inference on a reciprocal mean, where the choice of prior tail
decides how gracefully estimates degrade as the fractional parallax error
grows.  This package provides the measurement model, a catalog of
heavy-tailed priors with their tail algebra, two posterior engines
(deterministic quadrature and a no-U-turn sampler), scripted experiment
sweeps, and a Gaia-style catalog CLI.
"""

from .credence import (
    Dominance,
    GEPParams,
    PCredence,
    dominance,
    empirical_equivalence_bounds,
    gep_log_density,
    moment_finiteness,
    pcred_to_gep,
    posterior_pcredence,
)
from .inference import (
    ChainSet,
    Diagnostics,
    GridConfig,
    PosteriorGrid,
    PosteriorSummary,
    RiskResult,
    SamplerConfig,
    diagnostics,
    effective_sample_size,
    mcmc_sample,
    posterior_risk,
    ppc_replicates,
    quadrature_posterior,
    split_rhat,
    summarize,
    tail_probability,
)
from .model import (
    Measurement,
    fisher_information,
    fractional_parallax_error,
    likelihood_pcredence,
    log_likelihood,
    log_likelihood_grad,
    melo_distance,
    mle_distance,
)
from .priors import (
    ConstantVolume,
    DecayClass,
    Gamma,
    HalfCauchy,
    ImproperUniform,
    InverseGamma,
    Prior,
    ProductHalfCauchy,
    ProperUniform,
    ReciprocalGaussian,
    ReciprocalTruncatedNormal,
    TailMetadata,
    Weibull,
    check_C1,
    check_reciprocal_invariance,
    conjugate_rg_posterior,
    default_catalog,
    log_prior_density,
    log_prior_grad,
    make_prior,
    tail_metadata,
)

__version__ = "0.1.0"
