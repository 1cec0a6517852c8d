"""Catalog ingestion, batch estimation, CSV round-trips, and the CLI surface."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from plxdist import HalfCauchy, Measurement, make_prior, quadrature_posterior
from plxdist.catalog import (
    CatalogRow,
    batch_estimate,
    fmt,
    ingest_catalog,
    load_config,
    read_estimates_csv,
    write_estimates_csv,
)
from plxdist.cli import main
from plxdist.errors import ConfigError, EmptyCatalog

GOOD_CSV = """source_id,parallax,parallax_error
s1,2.0,0.3
s2,-0.4,0.3
s3,0.0,0.25
s4,1.5,0.2
"""

MIXED_CSV = """source_id,parallax,parallax_error
ok1,2.0,0.3
bad1,2.0,0
bad2,abc,0.3
ok2,-0.4,0.25
bad3,1.0,-0.2
"""


@pytest.fixture
def good_catalog(tmp_path):
    path = tmp_path / "catalog.csv"
    path.write_text(GOOD_CSV, encoding="utf-8")
    return path


class TestIngest:
    def test_accepts_rows_in_order(self, good_catalog):
        result = ingest_catalog(good_catalog)
        assert [row.source_id for row in result.rows] == ["s1", "s2", "s3", "s4"]
        assert result.rows[0].parallax_mas == 2.0
        assert result.rejects == []

    def test_negative_parallax_is_data(self, good_catalog):
        result = ingest_catalog(good_catalog)
        assert result.rows[1].parallax_mas == -0.4

    def test_rejects_carry_line_numbers(self, tmp_path):
        path = tmp_path / "mixed.csv"
        path.write_text(MIXED_CSV, encoding="utf-8")
        result = ingest_catalog(path)
        assert [row.source_id for row in result.rows] == ["ok1", "ok2"]
        assert [rej.line_number for rej in result.rejects] == [3, 4, 6]

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("source_id,plx,plx_err\na,1,0.1\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="parallax"):
            ingest_catalog(path)

    def test_custom_column_map(self, tmp_path):
        path = tmp_path / "custom.csv"
        path.write_text("star,plx,plx_err\na,1.0,0.1\n", encoding="utf-8")
        result = ingest_catalog(
            path,
            {"source_id": "star", "parallax_mas": "plx", "parallax_error_mas": "plx_err"},
        )
        assert result.rows[0].source_id == "a"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(EmptyCatalog):
            ingest_catalog(path)
        path.write_text("source_id,parallax,parallax_error\n", encoding="utf-8")
        with pytest.raises(EmptyCatalog):
            ingest_catalog(path)


class TestBatchEstimate:
    def test_unit_conversion_and_naive(self):
        rows = [CatalogRow("s1", 2.0, 0.3)]
        rec = batch_estimate(rows, HalfCauchy(1000.0))[0]
        assert rec.omega_arcsec == 0.002
        assert rec.naive_distance_pc == 500.0
        assert rec.quantile_16_pc < rec.posterior_median_pc < rec.quantile_84_pc

    def test_conversion_is_correctly_rounded(self):
        # the stored double is the nearest representable to the exact mas/1000
        rng = np.random.default_rng(15)
        for mas in rng.uniform(-10, 10, 200):
            omega = float(mas) / 1000.0
            exact = Fraction(float(mas)) / 1000
            ulp = abs(float(np.spacing(omega)))
            assert abs(Fraction(omega) - exact) <= Fraction(ulp) / 2

    def test_negative_parallax_row(self):
        rows = [CatalogRow("neg", -0.4, 0.3)]
        rec = batch_estimate(rows, HalfCauchy(1000.0))[0]
        assert rec.naive_distance_pc is None
        assert rec.posterior_median_pc is not None
        assert math.isfinite(rec.posterior_median_pc)
        assert rec.flags == ""

    def test_improper_prior_flags_rows(self):
        from plxdist import ImproperUniform

        rec = batch_estimate([CatalogRow("a", 2.0, 0.3)], ImproperUniform())[0]
        assert rec.flags == "ImproperPosterior"
        assert rec.posterior_median_pc is None
        assert rec.naive_distance_pc == 500.0

    def test_mcmc_engine_needs_seed(self):
        with pytest.raises(ConfigError):
            batch_estimate([CatalogRow("a", 2.0, 0.3)], HalfCauchy(1000.0), engine="mcmc")

    def test_round_trip_is_text_exact(self, tmp_path):
        rows = [CatalogRow("s1", 2.15, 0.37), CatalogRow("s2", -0.123456789, 0.5)]
        records = batch_estimate(rows, HalfCauchy(1000.0))
        path = tmp_path / "est.csv"
        write_estimates_csv(records, path)
        first = path.read_bytes()
        write_estimates_csv(read_estimates_csv(path), path)
        assert path.read_bytes() == first


class TestConfigFile:
    def test_parse_and_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("prior.name = gamma\nseed=9\n# comment\n\n", encoding="utf-8")
        assert load_config(path) == {"prior.name": "gamma", "seed": "9"}
        path.write_text("prior.flavor=hot\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="prior.flavor"):
            load_config(path)

    def test_cli_config_with_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("prior.name=gamma\nprior.scale=0.1\n", encoding="utf-8")
        rc = main(
            ["--config", str(cfg), "estimate", "--omega", "1.0", "--sigma", "0.5",
             "--prior", "half_cauchy"]
        )
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["prior"] == "half_cauchy"  # explicit flag beats config

        rc = main(["--config", str(cfg), "estimate", "--omega", "1.0", "--sigma", "0.5"])
        payload = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert payload["prior"] == "gamma"  # config fills the default


class TestCliCommands:
    def test_estimate_json(self, capsys):
        rc = main(["estimate", "--omega", "0.5", "--sigma", "0.1", "--prior", "hc"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["naive_distance_pc"] == 2.0
        grid = quadrature_posterior(HalfCauchy(1.0), Measurement(0.5, 0.1))
        assert payload["posterior_median_pc"] == pytest.approx(grid.quantile(0.5))

    def test_estimate_improper_exits_4(self, capsys):
        rc = main(["estimate", "--omega", "1", "--sigma", "1", "--prior", "improper_uniform"])
        assert rc == 4
        assert "ImproperPosterior" in capsys.readouterr().err

    def test_batch_default_scale_is_catalog_scale(self, tmp_path, good_catalog, capsys):
        out = tmp_path / "est.csv"
        rc = main(["batch", "--input", str(good_catalog), "--out", str(out)])
        assert rc == 0
        records = read_estimates_csv(out)
        # the batch default applies scale 1000 to the half-Cauchy
        direct = batch_estimate(ingest_catalog(good_catalog).rows, make_prior("hc", scale=1000.0))
        for got, want in zip(records, direct):
            assert got.posterior_median_pc == pytest.approx(want.posterior_median_pc, rel=1e-12)
        neg = records[1]
        assert neg.naive_distance_pc is None and neg.posterior_median_pc > 0

    def test_batch_determinism(self, tmp_path, good_catalog):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["batch", "--input", str(good_catalog), "--prior", "gamma"]
        assert main(argv + ["--out", str(out1)]) == 0
        assert main(argv + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_batch_missing_column_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n", encoding="utf-8")
        rc = main(["batch", "--input", str(bad), "--out", str(tmp_path / "o.csv")])
        assert rc == 2

    def test_batch_empty_exit_3(self, tmp_path, capsys):
        bad = tmp_path / "empty.csv"
        bad.write_text("source_id,parallax,parallax_error\n", encoding="utf-8")
        rc = main(["batch", "--input", str(bad), "--out", str(tmp_path / "o.csv")])
        assert rc == 3

    def test_simulate_writes_long_format(self, tmp_path):
        out = tmp_path / "sweep.csv"
        rc = main(
            ["simulate", "--out", str(out), "--j", "3", "--priors", "gamma,hc", "--sigma", "0.045"]
        )
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("index,omega_arcsec")
        assert len(lines) == 1 + 3 * 2

    def test_simulate_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["simulate", "--j", "3", "--priors", "hc"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_tail_sweep(self, tmp_path):
        out = tmp_path / "tail.csv"
        rc = main(
            ["tail-sweep", "--out", str(out), "--prior", "hc", "--num", "4", "--sigma", "1.0"]
        )
        assert rc == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "omega_arcsec,threshold_pc,tail_probability"
        assert len(rows) == 5

    def test_risk_sweep(self, tmp_path):
        out = tmp_path / "risk.csv"
        rc = main(
            ["risk-sweep", "--out", str(out), "--prior", "hc", "--r0", "2",
             "--a", "1.0", "--omega", "1.0"]
        )
        assert rc == 0
        assert "divergent" in out.read_text()

    def test_diagnose_requires_seed_and_chains(self, tmp_path, capsys):
        out = tmp_path / "diag.csv"
        with pytest.raises(SystemExit) as err:
            main(["diagnose", "--out", str(out), "--chains", "2"])
        assert err.value.code == 2
        with pytest.raises(SystemExit) as err:
            main(["--seed", "1", "diagnose", "--out", str(out), "--chains", "1"])
        assert err.value.code == 2

    def test_diagnose_runs(self, tmp_path):
        out = tmp_path / "diag.csv"
        rc = main(
            ["--seed", "2", "diagnose", "--out", str(out), "--j", "2", "--chains", "2",
             "--draws", "600", "--warmup", "200", "--priors", "gamma"]
        )
        assert rc == 0
        assert out.read_text().startswith("prior,mean_ess,mean_rhat")

    def test_ppc_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["--seed", "5", "ppc", "--omega", "1.0", "--sigma", "0.1", "--prior", "hc",
                "--n-rep", "50", "--draws", "600", "--warmup", "200"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_mcmc_estimate_requires_seed(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["estimate", "--omega", "1", "--sigma", "1", "--engine", "mcmc"])
        assert err.value.code == 2

    def test_dominance_outputs(self, capsys):
        assert main(["dominance", "gamma", "phc"]) == 0
        assert capsys.readouterr().out.strip() == "SECOND_DOMINATES"
        assert main(["dominance", "phc", "gamma"]) == 0
        assert capsys.readouterr().out.strip() == "FIRST_DOMINATES"
        assert main(["dominance", "hc", "rg"]) == 0
        assert capsys.readouterr().out.strip() == "EQUIVALENT"

    def test_dominance_compact_rejected(self, capsys):
        rc = main(["dominance", "uniform", "hc"])
        assert rc == 2

    def test_fmt_is_value_preserving(self):
        rng = np.random.default_rng(8)
        for value in rng.uniform(-1e6, 1e6, 500):
            assert float(fmt(float(value))) == float(value)
        assert fmt(None) == ""
