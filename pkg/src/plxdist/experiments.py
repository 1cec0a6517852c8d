"""Scripted studies: error sweeps, tail-probability sweeps, risk sweeps.

These reproduce the headline numerical findings at desk scale: the
squared-error-versus-fractional-error curves per prior, the vanishing tail
probability under fast-growing thresholds, the risk-bound checks, and the
sampler diagnostics summary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import PlxdistError
from .inference import (
    RiskResult,
    SamplerConfig,
    effective_sample_size,
    mcmc_sample,
    posterior_risk,
    quadrature_posterior,
    split_rhat,
    summarize,
    tail_probability,
)
from .model import Measurement, melo_distance, mle_distance
from .priors import Prior, default_catalog, tail_metadata

GROWTH_FUNCTIONS = {
    "inverse_square": lambda w: w**-2,
    "inverse_cube": lambda w: w**-3,
}


@dataclass(frozen=True)
class SweepConfig:
    """Design of the parallax sweep.

    The design parallaxes are uniformly spaced; the lower endpoint defaults to
    ``sigma_omega`` so the fractional parallax error tops out at exactly 1.
    With ``noisy`` the observed parallax is jittered around the design value
    (one shared draw per point across priors); the default observes the design
    value itself.
    """

    J: int = 500
    omega_min: float | None = None
    omega_max: float = 8.0
    sigma_omega: float = 0.045
    priors: tuple[tuple[str, Prior], ...] = field(
        default_factory=lambda: tuple(default_catalog().items())
    )
    engine: str = "quadrature"
    mcmc: SamplerConfig = field(default_factory=lambda: SamplerConfig(5000, 2000, 1, 0))
    seed: int = 0
    noisy: bool = False

    def __post_init__(self):
        if self.J < 2:
            raise ValueError("need at least two design points")
        if not (self.sigma_omega > 0):
            raise ValueError("sigma_omega must be positive")
        lo = self.effective_omega_min
        if not (0 < lo < self.omega_max):
            raise ValueError("need 0 < omega_min < omega_max")
        if self.engine not in ("quadrature", "mcmc"):
            raise ValueError(f"unknown engine {self.engine!r}")

    @property
    def effective_omega_min(self) -> float:
        return self.omega_min if self.omega_min is not None else self.sigma_omega


@dataclass(frozen=True)
class PriorPointResult:
    """Per-prior outcome at one design point."""

    median: float | None
    sq_error: float | None
    error: str | None = None
    rhat: float | None = None
    ess: float | None = None


@dataclass(frozen=True)
class SweepRecord:
    """One design point of the parallax sweep."""

    index: int
    omega: float
    omega_observed: float
    r_true: float
    f: float
    results: dict[str, PriorPointResult]


def _point_estimate(prior, m, cfg, point_seed) -> PriorPointResult:
    if cfg.engine == "quadrature":
        grid = quadrature_posterior(prior, m)
        return PriorPointResult(median=grid.quantile(0.5), sq_error=None)
    mcfg = replace(cfg.mcmc, seed=point_seed)
    cs = mcmc_sample(prior, m, mcfg)
    median = float(math.exp(np.median(cs.pooled())))
    rhat = ess = None
    if mcfg.n_chains >= 2:
        rhat = split_rhat(cs)
        ess = effective_sample_size(cs)
    return PriorPointResult(median=median, sq_error=None, rhat=rhat, ess=ess)


def run_parallax_sweep(cfg: SweepConfig = SweepConfig()) -> list[SweepRecord]:
    """Posterior medians and squared errors across the parallax design.

    Per-point inference failures are recorded in the row and never abort the
    sweep.  Deterministic given the seed and engine.
    """
    omegas = np.linspace(cfg.effective_omega_min, cfg.omega_max, cfg.J)
    noise_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    noise = noise_rng.standard_normal(cfg.J) if cfg.noisy else np.zeros(cfg.J)
    point_seeds = [
        int(child.generate_state(1)[0])
        for child in np.random.SeedSequence(cfg.seed).spawn(cfg.J)
    ]
    records: list[SweepRecord] = []
    for j, omega in enumerate(omegas):
        omega = float(omega)
        r_true = 1.0 / omega
        f = cfg.sigma_omega / omega
        omega_obs = omega + cfg.sigma_omega * float(noise[j])
        m = Measurement(omega_obs, cfg.sigma_omega)
        results: dict[str, PriorPointResult] = {}
        for name, prior in cfg.priors:
            try:
                res = _point_estimate(prior, m, cfg, point_seeds[j])
                sq = (res.median - r_true) ** 2
                results[name] = replace(res, sq_error=sq)
            except PlxdistError as exc:
                results[name] = PriorPointResult(
                    median=None, sq_error=None, error=type(exc).__name__
                )
        records.append(
            SweepRecord(
                index=j,
                omega=omega,
                omega_observed=omega_obs,
                r_true=r_true,
                f=f,
                results=results,
            )
        )
    return records


@dataclass(frozen=True)
class TailSweepRow:
    omega: float
    threshold: float
    tail_probability: float


def run_prop1_sweep(
    prior: Prior,
    growth: str = "inverse_square",
    omegas=None,
    sigma_omega: float = 1.0,
) -> list[TailSweepRow]:
    """Posterior mass beyond a threshold growing as the parallax shrinks.

    For reciprocal-invariant priors this mass must vanish as omega -> 0
    because the posterior cannot keep up with any diverging threshold; other
    priors are allowed through with a warning since the statement is not
    theirs to satisfy.
    """
    if growth not in GROWTH_FUNCTIONS:
        raise ValueError(f"unknown growth function {growth!r}")
    if not tail_metadata(prior).reciprocal_invariant:
        warnings.warn(
            f"prior {prior.name!r} is not reciprocal invariant; "
            "the vanishing-tail statement is not guaranteed for it"
        )
    if omegas is None:
        omegas = np.geomspace(1.0, 0.01, 9)
    c = GROWTH_FUNCTIONS[growth]
    rows = []
    for omega in np.asarray(omegas, dtype=float):
        grid = quadrature_posterior(prior, Measurement(float(omega), sigma_omega))
        threshold = float(c(omega))
        rows.append(
            TailSweepRow(float(omega), threshold, tail_probability(grid, threshold))
        )
    return rows


@dataclass(frozen=True)
class RiskSweepRow:
    r0: float
    result: RiskResult
    lower_bound: float


def run_risk_sweep(
    prior: Prior,
    r0s,
    a: float = 1.0,
    omega: float = 1.0,
    r_max: float | None = None,
) -> list[RiskSweepRow]:
    """Risk integrals with the quadratic lower bound for comparison.

    The bound ``exp(-1/4)/4 * prior_mass([1, 2]) * r0^2`` is the chain of
    inequalities for A = omega = 1; both sides are computed numerically.
    """
    sigma = math.sqrt(1.0 / (2.0 * a))
    m = Measurement(omega, sigma)
    from scipy.integrate import quad

    mass_12, _ = quad(lambda r: math.exp(float(prior.log_pdf(r))), 1.0, 2.0, limit=200)
    rows = []
    for r0 in r0s:
        result = posterior_risk(prior, m, float(r0), r_max=r_max)
        bound = math.exp(-0.25) / 4.0 * mass_12 * float(r0) ** 2
        rows.append(RiskSweepRow(float(r0), result, bound))
    return rows


@dataclass(frozen=True)
class DiagnosticsSummary:
    mean_ess: float
    mean_rhat: float
    n_points: int
    n_degenerate: int


def run_diagnostics_summary(cfg: SweepConfig) -> dict[str, DiagnosticsSummary]:
    """Mean sampler diagnostics per prior over the sweep design."""
    if cfg.engine != "mcmc":
        raise ValueError("diagnostics summary requires the mcmc engine")
    if cfg.mcmc.n_chains < 2:
        raise ValueError("split R-hat needs at least 2 chains")
    records = run_parallax_sweep(cfg)
    out: dict[str, DiagnosticsSummary] = {}
    for name, _ in cfg.priors:
        rhats = []
        esss = []
        degenerate = 0
        for rec in records:
            res = rec.results[name]
            if res.error == "DegenerateChain":
                degenerate += 1
                continue
            if res.rhat is not None:
                rhats.append(res.rhat)
                esss.append(res.ess)
        out[name] = DiagnosticsSummary(
            mean_ess=float(np.mean(esss)) if esss else math.nan,
            mean_rhat=float(np.mean(rhats)) if rhats else math.nan,
            n_points=len(rhats),
            n_degenerate=degenerate,
        )
    return out


@dataclass(frozen=True)
class EstimatorComparison:
    mle: float | None
    melo: float
    posterior_median: float
    posterior_mode: float


def compare_estimators(m: Measurement, prior: Prior) -> EstimatorComparison:
    """The two frequentist baselines next to the posterior median and mode."""
    grid = quadrature_posterior(prior, m)
    summary = summarize(grid, tail_metadata(prior).pcred)
    return EstimatorComparison(
        mle=mle_distance(m),
        melo=melo_distance(m),
        posterior_median=summary.median,
        posterior_mode=summary.mode,
    )


def t_space_log_posterior(prior: Prior, m: Measurement):
    """Location-form posterior log density in t = 1/r, extended evenly to t < 0.

    The change of variables sends the prior to pi(1/|t|)/t^2 and the
    likelihood to a Gaussian location kernel in t; the even extension gives
    the full-line density whose tail the composition rule describes (for the
    half-Cauchy prior it is exactly the Cauchy-times-Gaussian target).
    Unnormalized.
    """
    sig_sq = m.sigma_omega**2

    def logdens(t: float) -> float:
        at = abs(t)
        if at < 1e-300:
            at = 1e-300
        lp = float(prior.log_pdf(1.0 / at)) - 2.0 * math.log(at)
        return lp - 0.5 * (m.omega - t) ** 2 / sig_sq

    return logdens
