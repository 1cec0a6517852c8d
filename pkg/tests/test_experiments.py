"""Experiment harness: sweeps, tail studies, risk rows, estimator comparison."""

import math

import numpy as np
import pytest

from plxdist import HalfCauchy, Measurement, ProductHalfCauchy, default_catalog
from plxdist.experiments import (
    SweepConfig,
    compare_estimators,
    run_diagnostics_summary,
    run_parallax_sweep,
    run_prop1_sweep,
    run_risk_sweep,
    t_space_log_posterior,
)
from plxdist.inference import SamplerConfig

SMALL = SweepConfig(
    J=6,
    sigma_omega=0.045,
    priors=(("gamma", default_catalog()["gamma"]), ("half_cauchy", HalfCauchy(1.0))),
    seed=3,
)


class TestSweep:
    def test_design_consistency(self):
        records = run_parallax_sweep(SMALL)
        assert len(records) == 6
        assert records[0].omega == SMALL.sigma_omega  # f tops out at exactly 1
        assert records[0].f == 1.0
        assert records[-1].omega == 8.0
        for rec in records:
            assert rec.f == SMALL.sigma_omega / rec.omega
            assert abs(rec.f * rec.omega - SMALL.sigma_omega) <= np.spacing(SMALL.sigma_omega)
            assert rec.r_true == 1.0 / rec.omega
            for res in rec.results.values():
                assert res.error is None
                assert res.median > 0
                assert res.sq_error >= 0

    def test_default_f_range(self):
        cfg = SweepConfig(J=500)
        omegas = np.linspace(cfg.effective_omega_min, cfg.omega_max, cfg.J)
        f = cfg.sigma_omega / omegas
        assert f.max() == 1.0
        assert f.min() == pytest.approx(0.005625, rel=1e-12)

    def test_determinism(self):
        a = run_parallax_sweep(SMALL)
        b = run_parallax_sweep(SMALL)
        assert a == b

    def test_noisy_mode_shares_noise_across_priors(self):
        cfg = SweepConfig(
            J=4,
            sigma_omega=0.045,
            priors=tuple(default_catalog().items())[:2],
            seed=11,
            noisy=True,
        )
        records = run_parallax_sweep(cfg)
        assert any(rec.omega_observed != rec.omega for rec in records)
        again = run_parallax_sweep(cfg)
        assert [r.omega_observed for r in records] == [r.omega_observed for r in again]

    def test_failures_recorded_not_raised(self):
        from plxdist import ProperUniform

        cfg = SweepConfig(
            J=3,
            sigma_omega=0.045,
            priors=(("tiny_uniform", ProperUniform(1e-160)),),
            seed=0,
        )
        records = run_parallax_sweep(cfg)
        for rec in records:
            res = rec.results["tiny_uniform"]
            assert res.error == "TailNotCaptured"
            assert res.median is None

    def test_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(J=1)
        with pytest.raises(ValueError):
            SweepConfig(omega_min=9.0, omega_max=8.0)
        with pytest.raises(ValueError):
            SweepConfig(engine="exact")


class TestProp1Sweep:
    def test_half_cauchy_vanishes(self):
        rows = run_prop1_sweep(HalfCauchy(1.0), "inverse_square", omegas=[1.0, 0.1, 0.01])
        probs = [r.tail_probability for r in rows]
        assert probs[0] > probs[1] > probs[2]
        assert probs[2] < 1e-3
        assert rows[1].threshold == pytest.approx(100.0)

    def test_non_invariant_prior_warns(self):
        with pytest.warns(UserWarning, match="reciprocal invariant"):
            run_prop1_sweep(default_catalog()["gamma"], omegas=[1.0, 0.5])

    def test_unknown_growth_rejected(self):
        with pytest.raises(ValueError):
            run_prop1_sweep(HalfCauchy(1.0), growth="linear")


class TestRiskSweep:
    def test_rows_carry_bounds(self):
        rows = run_risk_sweep(default_catalog()["gamma"], [2.0, 5.0], a=1.0, omega=1.0)
        assert [row.r0 for row in rows] == [2.0, 5.0]
        for row in rows:
            assert not row.result.divergent
            assert row.result.value >= row.lower_bound

    def test_divergent_rows_propagate(self):
        rows = run_risk_sweep(HalfCauchy(1.0), [2.0], a=1.0, omega=1.0)
        assert rows[0].result.divergent

    def test_delay_ordering_on_common_window(self):
        gamma = default_catalog()["gamma"]
        phc = ProductHalfCauchy(1.0)
        ratios = []
        for r0 in (2.0, 5.0, 10.0):
            top = run_risk_sweep(gamma, [r0], a=1.0, omega=1.0, r_max=50.0)[0].result.value
            bottom = run_risk_sweep(phc, [r0], a=1.0, omega=1.0, r_max=50.0)[0].result.value
            ratios.append(top / bottom)
        assert ratios[0] < ratios[1] < ratios[2]


class TestDiagnosticsSummary:
    def test_requires_multiple_chains(self):
        cfg = SweepConfig(
            J=2,
            engine="mcmc",
            mcmc=SamplerConfig(600, 200, 1, 0),
            priors=(("half_cauchy", HalfCauchy(1.0)),),
        )
        with pytest.raises(ValueError, match="2 chains"):
            run_diagnostics_summary(cfg)

    def test_requires_mcmc_engine(self):
        with pytest.raises(ValueError, match="mcmc"):
            run_diagnostics_summary(SweepConfig(J=2, engine="quadrature"))

    def test_summary_values(self):
        cfg = SweepConfig(
            J=3,
            engine="mcmc",
            mcmc=SamplerConfig(900, 300, 2, 0),
            priors=(("gamma", default_catalog()["gamma"]),),
            seed=5,
        )
        out = run_diagnostics_summary(cfg)
        diag = out["gamma"]
        assert diag.n_points == 3
        assert 0.98 <= diag.mean_rhat <= 1.05
        assert diag.mean_ess > 0


class TestCompareEstimators:
    def test_reference_values(self):
        out = compare_estimators(Measurement(1.0, 1.0), HalfCauchy(1.0))
        assert out.mle == 1.0
        assert out.melo == 0.5
        assert out.posterior_median > 0
        assert out.posterior_mode > 0

    def test_negative_parallax(self):
        out = compare_estimators(Measurement(-0.05, 0.045), HalfCauchy(1.0))
        assert out.mle is None
        assert out.melo < 0
        assert out.posterior_median > 0 and math.isfinite(out.posterior_median)
        assert out.posterior_mode > 0

    def test_concentration_limit(self):
        out = compare_estimators(Measurement(1.0, 1e-5), HalfCauchy(1.0))
        for value in (out.mle, out.melo, out.posterior_median, out.posterior_mode):
            assert value == pytest.approx(1.0, abs=1e-3)


class TestLocationFormTarget:
    def test_half_cauchy_matches_cauchy_gaussian(self):
        m = Measurement(1.0, 1.0)
        target = t_space_log_posterior(HalfCauchy(1.0), m)
        for t in (-5.0, -0.5, 0.3, 2.0, 40.0):
            expected = (
                math.log(2.0 / math.pi)
                - math.log(1.0 + t * t)
                - 0.5 * (m.omega - t) ** 2
            )
            assert target(t) == pytest.approx(expected, abs=1e-12)

    def test_matches_quadrature_posterior_shape_on_positive_axis(self):
        m = Measurement(1.0, 1.0)
        from plxdist import quadrature_posterior

        grid = quadrature_posterior(HalfCauchy(1.0), m)
        target = t_space_log_posterior(HalfCauchy(1.0), m)
        ts = np.linspace(0.2, 3.0, 25)
        # change of variables: density of t = 1/r is pi_x(-log t) / t
        offsets = []
        for t in ts:
            x = -math.log(t)
            lx = float(np.interp(x, grid.nodes, grid.log_density)) - grid.log_norm
            offsets.append(lx - math.log(t) - target(float(t)))
        spread = max(offsets) - min(offsets)
        assert spread < 1e-3
