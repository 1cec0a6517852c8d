"""Tail-thickness algebra: credence tuples, GEP reference densities, dominance.

The two parameter spaces kept here are deliberately distinct.  ``PCredence``
stores catalog-style tuples in the sign convention where the described tail is

    x^(-alpha) * (log x)^(-beta) * exp(-delta * x^gamma),

so a *larger* entry always means a *lighter* tail.  ``GEPParams`` stores the
native exponents of the generalized exponential power density

    p(z) ~ max(|z|, z0)^alpha * log(max(|z|, z0))^beta * exp(-delta * max(|z|, z0)^gamma),

whose alpha/beta carry the opposite sign.  ``pcred_to_gep`` is the only bridge
between the two; mixing them silently corrupts both the dominance relation and
the density checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DomainError, HypothesisViolated, InvalidGEP, UnboundedRatio


class Dominance(Enum):
    """Outcome of comparing two tail descriptors."""

    FIRST_DOMINATES = "FIRST_DOMINATES"
    SECOND_DOMINATES = "SECOND_DOMINATES"
    EQUIVALENT = "EQUIVALENT"


@dataclass(frozen=True)
class PCredence:
    """Four-exponent tail descriptor (gamma, delta, alpha, beta).

    gamma/delta control exponential decay ``exp(-delta * x^gamma)``, alpha the
    polynomial factor ``x^-alpha`` and beta the logarithmic factor
    ``(log x)^-beta``.  A heavier tail therefore sorts *before* a lighter one
    under lexicographic comparison of ``(gamma, delta, alpha, beta)``.
    """

    gamma: float
    delta: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise ValueError("p-credence entries must be finite")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.gamma > 0 and self.delta <= 0:
            raise ValueError("delta must be > 0 when gamma > 0")
        if self.gamma == 0 and self.delta != 0:
            raise ValueError("delta must be 0 when gamma = 0")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.gamma, self.delta, self.alpha, self.beta)

    @property
    def is_proper(self) -> bool:
        """Whether a density with this tail can integrate to a finite value."""
        if self.gamma > 0:
            return True
        return self.alpha > 1 or (self.alpha == 1 and self.beta > 1)


@dataclass(frozen=True)
class GEPParams:
    """Native exponents of a generalized exponential power density.

    The density is unnormalized:

        log p(z) = alpha*log(M) + beta*log(log(M)) - delta*M^gamma,
        M = max(|z|, z0).

    Construction enforces the family's feasibility conditions; violations
    raise :class:`InvalidGEP`.
    """

    gamma: float
    delta: float
    alpha: float
    beta: float
    z0: float

    def __post_init__(self):
        vals = (self.gamma, self.delta, self.alpha, self.beta, self.z0)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidGEP("GEP parameters must be finite")
        if self.beta != 0:
            if self.z0 <= 1:
                raise InvalidGEP("z0 must exceed 1 when beta != 0")
        elif self.z0 <= 0:
            raise InvalidGEP("z0 must be positive")
        log_term = self.beta / math.log(self.z0) if self.beta != 0 else 0.0
        if self.alpha + log_term > self.delta * self.gamma * self.z0**self.gamma + 1e-12:
            raise InvalidGEP(
                "alpha + beta/log(z0) must not exceed delta*gamma*z0^gamma"
            )
        if self.gamma == 0:
            if self.alpha > -1:
                raise InvalidGEP("alpha must be <= -1 when gamma = 0")
            if self.alpha == -1 and self.beta >= -1:
                raise InvalidGEP("beta must be < -1 when gamma = 0 and alpha = -1")


def gep_log_density(g: GEPParams, z) -> float | np.ndarray:
    """Unnormalized log density of the GEP family at ``z`` (scalar or array)."""
    z_arr = np.asarray(z, dtype=float)
    m = np.maximum(np.abs(z_arr), g.z0)
    out = g.alpha * np.log(m) - g.delta * np.power(m, g.gamma)
    if g.beta != 0:
        out = out + g.beta * np.log(np.log(m))
    if np.ndim(z) == 0:
        return float(out)
    return out


def pcred_to_gep(p: PCredence, z0: float | None = None) -> GEPParams:
    """Bridge a catalog tuple to native GEP exponents (sign flip on alpha, beta).

    Default cutoff is the smallest simple feasible choice: 2 when the tuple
    carries a logarithmic factor, else 1.
    """
    if z0 is None:
        z0 = 2.0 if p.beta != 0 else 1.0
    return GEPParams(p.gamma, p.delta, -p.alpha, -p.beta, z0)


def dominance(f: PCredence, g: PCredence) -> Dominance:
    """Compare two tail descriptors; the heavier tail dominates.

    Equal tuples are ``EQUIVALENT``.  Otherwise the lexicographically smaller
    ``(gamma, delta, alpha, beta)`` tuple describes the heavier tail and its
    density bounds the other from above up to a positive constant.
    """
    if f.as_tuple() == g.as_tuple():
        return Dominance.EQUIVALENT
    if f.as_tuple() < g.as_tuple():
        return Dominance.FIRST_DOMINATES
    return Dominance.SECOND_DOMINATES


def posterior_pcredence(likelihood: PCredence, prior: PCredence) -> PCredence:
    """Tail of the location-form posterior built from likelihood and prior.

    Requires a sub-exponential prior (gamma = 0) against an exponential-class
    likelihood (gamma > 0); the posterior keeps the likelihood's exponential
    envelope while the polynomial and logarithmic exponents add.
    """
    if prior.gamma != 0:
        raise HypothesisViolated("prior must have gamma = 0")
    if likelihood.gamma <= 0:
        raise HypothesisViolated("likelihood must have gamma > 0")
    return PCredence(
        likelihood.gamma,
        likelihood.delta,
        prior.alpha + likelihood.alpha,
        prior.beta + likelihood.beta,
    )


def moment_finiteness(tail: PCredence, k: int) -> bool:
    """Whether the k-th absolute moment of a density with this tail is finite."""
    if k < 1 or int(k) != k:
        raise DomainError(f"moment order must be a positive integer, got {k}")
    if tail.gamma > 0:
        return True
    return tail.alpha > k + 1 or (tail.alpha == k + 1 and tail.beta > 1)


def empirical_equivalence_bounds(
    target_logdensity: Callable[[float], float],
    g: GEPParams,
    lo: float,
    hi: float,
    n: int = 1000,
    center: float = 0.0,
) -> tuple[float, float]:
    """Scan the ratio target/GEP over a grid and report its min and max.

    ``center`` shifts the GEP argument so the reference can sit on a location
    other than the origin.  Finite positive bounds certify the two densities
    are equivalent (up to constants) on the range; any non-finite ratio raises
    :class:`UnboundedRatio` naming the offending point.
    """
    if n < 100:
        raise DomainError("grid size must be at least 100")
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError("range must be a finite interval")
    ts = np.linspace(lo, hi, n)
    k_low = math.inf
    k_high = -math.inf
    for t in ts:
        diff = target_logdensity(float(t)) - gep_log_density(g, float(t - center))
        ratio = math.exp(diff) if diff < 709.0 else math.inf
        if math.isnan(ratio) or math.isinf(ratio):
            raise UnboundedRatio(f"density ratio is not finite at t={t}", at=float(t))
        k_low = min(k_low, ratio)
        k_high = max(k_high, ratio)
    return float(k_low), float(k_high)
