"""Single-observation measurement model and frequentist baseline estimators.

Distances are in parsecs and parallaxes in arcseconds throughout; unit
conversion is the CLI layer's job.  All densities live in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .credence import PCredence
from .errors import DomainError

_LOG_SQRT_TWO_PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Measurement:
    """One observed parallax (arcseconds) with its known noise scale.

    ``omega`` may be zero or negative; that is data, not an error.  The noise
    scale must be strictly positive and finite.
    """

    omega: float
    sigma_omega: float

    def __post_init__(self):
        if not math.isfinite(self.omega):
            raise ValueError(f"omega must be finite, got {self.omega}")
        if not (math.isfinite(self.sigma_omega) and self.sigma_omega > 0):
            raise ValueError(f"sigma_omega must be positive and finite, got {self.sigma_omega}")


def _positive_distances(r) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr <= 0):
        raise DomainError(f"distance must be positive, got {r}")
    return arr


def log_likelihood(m: Measurement, r) -> float | np.ndarray:
    """Log density of observing ``m.omega`` given true distance ``r`` (pc).

    The observed parallax is Gaussian around the reciprocal distance:
    ``-log(sqrt(2*pi)*sigma) - (omega - 1/r)^2 / (2*sigma^2)``.
    """
    arr = _positive_distances(r)
    z = (m.omega - 1.0 / arr) / m.sigma_omega
    out = -_LOG_SQRT_TWO_PI - math.log(m.sigma_omega) - 0.5 * z * z
    if np.ndim(r) == 0:
        return float(out)
    return out


def log_likelihood_grad(m: Measurement, x) -> float | np.ndarray:
    """d/dx of ``log_likelihood(m, e^x)`` for the log-distance coordinate x."""
    x_arr = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        t = np.exp(-x_arr)
    out = -(m.omega - t) * t / (m.sigma_omega**2)
    if np.ndim(x) == 0:
        return float(out)
    return out


def fisher_information(m: Measurement, r) -> float | np.ndarray:
    """Expected information about the distance, ``1 / (sigma^2 r^4)``.

    Grows without bound as r -> 0: inference is extremely sensitive near the
    origin.
    """
    arr = _positive_distances(r)
    out = 1.0 / (m.sigma_omega**2 * arr**4)
    if np.ndim(r) == 0:
        return float(out)
    return out


def mle_distance(m: Measurement) -> float | None:
    """Naive inverted parallax ``1/omega``, or None when omega <= 0.

    The undefined case is an explicit optional value rather than NaN so that
    batch outputs stay machine-checkable.
    """
    if m.omega > 0:
        return 1.0 / m.omega
    return None


def melo_distance(m: Measurement) -> float:
    """Minimum-expected-loss point estimate ``omega / (omega^2 + sigma^2)``.

    Defined for every omega, including non-positive values; callers decide
    whether a non-positive result is usable.
    """
    return m.omega / (m.omega**2 + m.sigma_omega**2)


def fractional_parallax_error(m: Measurement, r_true: float) -> float:
    """Relative-uncertainty regime indicator ``sigma_omega * r_true``."""
    if not (r_true > 0):
        raise DomainError(f"r_true must be positive, got {r_true}")
    return m.sigma_omega * r_true


def likelihood_pcredence(m: Measurement) -> PCredence:
    """Tail descriptor of the likelihood as a function of t = 1/r."""
    return PCredence(2.0, 1.0 / (2.0 * m.sigma_omega**2), 0.0, 0.0)
