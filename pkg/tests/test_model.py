"""Measurement model: likelihood, gradients, information, baseline estimators."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from plxdist import (
    Measurement,
    fisher_information,
    fractional_parallax_error,
    likelihood_pcredence,
    log_likelihood,
    log_likelihood_grad,
    melo_distance,
    mle_distance,
)
from plxdist.errors import DomainError

from conftest import central_difference


class TestLogLikelihood:
    def test_zero_exponent(self):
        m = Measurement(1.0, 1.0)
        assert log_likelihood(m, 1.0) == pytest.approx(math.log(1.0 / math.sqrt(2 * math.pi)), abs=1e-15)

    def test_unit_offset(self):
        m = Measurement(2.0, 1.0)
        expected = math.log(1.0 / math.sqrt(2 * math.pi)) - 0.5
        assert log_likelihood(m, 1.0) == pytest.approx(expected, abs=1e-15)

    def test_matches_normal_pdf_oracle(self):
        m = Measurement(0.045, 0.045)
        r = np.geomspace(0.5, 500.0, 200)
        ours = log_likelihood(m, r)
        oracle = stats.norm.logpdf(m.omega, loc=1.0 / r, scale=m.sigma_omega)
        np.testing.assert_allclose(ours, oracle, rtol=0, atol=1e-12)

    def test_rejects_nonpositive_distance(self):
        m = Measurement(1.0, 1.0)
        with pytest.raises(DomainError):
            log_likelihood(m, 0.0)
        with pytest.raises(DomainError):
            log_likelihood(m, -3.0)

    @pytest.mark.parametrize("r", [0.1, 1.0, 17.3])
    @pytest.mark.parametrize("sigma", [0.045, 1.0])
    def test_normalizes_over_observations(self, r, sigma):
        center = 1.0 / r
        # +-50 sigma carries all the mass up to ~1e-544
        total, _ = integrate.quad(
            lambda w: math.exp(log_likelihood(Measurement(w, sigma), r)),
            center - 50.0 * sigma,
            center + 50.0 * sigma,
            limit=200,
        )
        assert total == pytest.approx(1.0, abs=1e-9)


class TestLikelihoodGradient:
    def test_mode_at_unit_distance(self):
        assert log_likelihood_grad(Measurement(1.0, 1.0), 0.0) == 0.0

    def test_unit_pull(self):
        assert log_likelihood_grad(Measurement(2.0, 1.0), 0.0) == pytest.approx(-1.0)

    def test_against_finite_differences(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            omega = rng.uniform(-2.0, 8.0)
            sigma = rng.uniform(0.05, 2.0)
            x = rng.uniform(-2.0, 6.0)
            m = Measurement(omega, sigma)
            analytic = log_likelihood_grad(m, x)
            numeric = central_difference(lambda v: log_likelihood(m, math.exp(v)), x)
            assert abs(analytic - numeric) <= 1e-6 * max(1.0, abs(analytic))


class TestFisherInformation:
    def test_values(self):
        assert fisher_information(Measurement(1.0, 1.0), 1.0) == 1.0
        assert fisher_information(Measurement(1.0, 1.0), 2.0) == pytest.approx(1.0 / 16.0)
        assert fisher_information(Measurement(0.1, 0.045), 10.0) == pytest.approx(
            1.0 / (0.045**2 * 10.0**4)
        )

    def test_scaling_identity(self):
        rng = np.random.default_rng(11)
        r = rng.uniform(0.01, 100.0, 200)
        sigma = rng.uniform(0.01, 3.0, 200)
        for ri, si in zip(r, sigma):
            m = Measurement(1.0, si)
            assert fisher_information(m, ri) * ri**4 * si**2 == pytest.approx(1.0, rel=1e-14)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            fisher_information(Measurement(1.0, 1.0), -1.0)


class TestBaselineEstimators:
    def test_mle(self):
        assert mle_distance(Measurement(0.5, 0.1)) == 2.0
        assert mle_distance(Measurement(0.002, 0.1)) == 500.0
        assert mle_distance(Measurement(-0.1, 0.1)) is None
        assert mle_distance(Measurement(0.0, 0.1)) is None

    def test_melo(self):
        assert melo_distance(Measurement(1.0, 1.0)) == 0.5
        assert melo_distance(Measurement(0.0, 1.0)) == 0.0
        assert melo_distance(Measurement(2.0, 1e-9)) == pytest.approx(0.5, rel=1e-12)

    def test_melo_approaches_mle_monotonically(self):
        gaps = []
        for sigma in (1e-3, 1e-6):
            m = Measurement(0.5, sigma)
            gaps.append(abs(melo_distance(m) - mle_distance(m)) / mle_distance(m))
        assert gaps[0] > gaps[1] > 0


class TestFractionalParallaxError:
    def test_values(self):
        assert fractional_parallax_error(Measurement(1.0, 0.045), 1.0 / 0.045) == pytest.approx(1.0)
        assert fractional_parallax_error(Measurement(1.0, 0.045), 1.0) == pytest.approx(0.045)
        assert fractional_parallax_error(Measurement(9.0, 0.045), 1.0 / 9.0) == pytest.approx(0.005)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            fractional_parallax_error(Measurement(1.0, 0.045), 0.0)


class TestMeasurementInvariants:
    def test_rejects_bad_noise(self):
        with pytest.raises(ValueError):
            Measurement(1.0, 0.0)
        with pytest.raises(ValueError):
            Measurement(1.0, -1.0)
        with pytest.raises(ValueError):
            Measurement(math.nan, 1.0)

    def test_negative_omega_is_legal(self):
        assert Measurement(-0.3, 0.045).omega == -0.3

    def test_likelihood_pcredence(self):
        p = likelihood_pcredence(Measurement(1.0, 1.0))
        assert (p.gamma, p.delta, p.alpha, p.beta) == (2.0, 0.5, 0.0, 0.0)
