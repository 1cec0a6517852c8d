"""Convergence and efficiency diagnostics for sampled chains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import DegenerateChain, DomainError
from .sampler import ChainSet


@dataclass(frozen=True)
class Diagnostics:
    """Per-quantity convergence summaries."""

    rhat: dict[str, float]
    ess: dict[str, float]


def _chain_matrix(cs, transform: Callable | None) -> np.ndarray:
    if isinstance(cs, ChainSet):
        chains = cs.chains
    else:
        chains = [np.asarray(c, dtype=float) for c in cs]
    n = min(c.size for c in chains)
    mat = np.stack([np.asarray(c[:n], dtype=float) for c in chains])
    if transform is not None:
        mat = np.asarray(transform(mat), dtype=float)
    return mat


def split_rhat(cs, transform: Callable | None = None) -> float:
    """Split potential-scale-reduction factor.

    Each chain is halved; the statistic is sqrt((n-1)/n + B/(n W)) over the
    resulting half-chains.  Values near 1 indicate the halves agree in both
    location and spread.
    """
    mat = _chain_matrix(cs, transform)
    n = mat.shape[1]
    half = n // 2
    if half < 2:
        raise DomainError("chains are too short to split")
    halves = np.concatenate([mat[:, :half], mat[:, n - half :]], axis=0)
    within = halves.var(axis=1, ddof=1)
    w = float(np.mean(within))
    if w == 0.0 or np.any(within == 0.0):
        raise DegenerateChain("zero within-half variance")
    b_over_n = float(halves.mean(axis=1).var(ddof=1))
    return math.sqrt((half - 1) / half + b_over_n / w)


def _autocovariances(row: np.ndarray) -> np.ndarray:
    n = row.size
    centered = row - row.mean()
    size = 1
    while size < 2 * n:
        size <<= 1
    spec = np.fft.rfft(centered, size)
    acov = np.fft.irfft(spec * np.conj(spec), size)[:n].real
    return acov / n


def effective_sample_size(cs, transform: Callable | None = None) -> float:
    """Autocorrelation-based effective sample size with pairwise truncation.

    Autocorrelations are pooled across chains, summed in adjacent pairs,
    truncated at the first non-positive pair, and forced non-increasing before
    the sum (the initial-monotone rule).  The estimate is capped at the total
    retained draw count.
    """
    mat = _chain_matrix(cs, transform)
    m, n = mat.shape
    if n < 8:
        raise DomainError("need chains of length at least 8")
    acov = np.stack([_autocovariances(mat[j]) for j in range(m)])
    chain_var = acov[:, 0] * n / (n - 1)
    w = float(np.mean(chain_var))
    if w == 0.0:
        raise DegenerateChain("zero chain variance")
    b_over_n = float(mat.mean(axis=1).var(ddof=1)) if m > 1 else 0.0
    var_plus = w * (n - 1) / n + b_over_n
    if var_plus <= 0.0:
        raise DegenerateChain("non-positive pooled variance")

    rho = 1.0 - (w - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0
    max_pairs = (n - 1) // 2
    tau = 0.0
    prev = math.inf
    for k in range(max_pairs):
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair <= 0.0:
            break
        pair = min(pair, prev)
        tau += pair
        prev = pair
    tau = max(2.0 * tau - 1.0, 1e-12)
    return float(min(m * n / tau, m * n))


def diagnostics(cs, transforms: dict[str, Callable | None] | None = None) -> Diagnostics:
    """R-hat and ESS for one or more transformed quantities of a chain set."""
    if transforms is None:
        transforms = {"log_r": None, "r": np.exp}
    rhat = {name: split_rhat(cs, tr) for name, tr in transforms.items()}
    ess = {name: effective_sample_size(cs, tr) for name, tr in transforms.items()}
    return Diagnostics(rhat=rhat, ess=ess)
