"""Shared fixtures and independent numeric oracles for the test suite."""

import math

import numpy as np
import pytest
from scipy import integrate

from plxdist import default_catalog


@pytest.fixture(scope="session")
def catalog():
    """The six benchmark priors, lightest tail first."""
    return default_catalog()


def central_difference(fn, x: float, h: float = 1e-6) -> float:
    """Plain central finite difference, the oracle for every gradient test."""
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def prior_mass(prior, inner_points=()) -> float:
    """Total prior mass by adaptive quadrature, independent of the grid engine.

    Integrates [0, 1] directly and maps [1, inf) onto (0, 1] through r -> 1/u,
    which turns polynomial tails into integrable endpoint behavior.
    """

    def density(r):
        return math.exp(float(prior.log_pdf(r)))

    pts = sorted(p for p in inner_points if 0 < p < 1)
    lower, _ = integrate.quad(density, 0.0, 1.0, points=pts or None, limit=400)
    upper, _ = integrate.quad(
        lambda u: density(1.0 / u) / u**2, 1e-12, 1.0, limit=400
    )
    return lower + upper


def grid_mass(grid) -> float:
    """Trapezoid mass of a normalized posterior grid."""
    return float(
        np.trapezoid(np.exp(grid.log_density - grid.log_norm), grid.nodes)
    )
