"""Catalog ingestion, batch estimation, CSV serialization, and config files.

The interchange format is comma-separated UTF-8 with a mandatory header and LF
line endings.  Floats are written with 17 significant digits so a write/read
cycle reproduces values bit-exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyCatalog, PlxdistError
from .experiments import RiskSweepRow, SweepRecord, TailSweepRow
from .inference import SamplerConfig, mcmc_sample, quadrature_posterior
from .model import Measurement
from .priors import Prior

MAS_PER_ARCSEC = 1000.0

DEFAULT_COLUMNS = {
    "source_id": "source_id",
    "parallax_mas": "parallax",
    "parallax_error_mas": "parallax_error",
}


def fmt(value: float | None) -> str:
    """17-significant-digit text form; empty string for absent values."""
    if value is None:
        return ""
    return format(value, ".17g")


@dataclass(frozen=True)
class CatalogRow:
    """One catalog star: opaque identifier plus parallax data in mas."""

    source_id: str
    parallax_mas: float
    parallax_error_mas: float


@dataclass(frozen=True)
class RejectedRow:
    line_number: int
    reason: str


@dataclass(frozen=True)
class IngestResult:
    rows: list[CatalogRow]
    rejects: list[RejectedRow]


def ingest_catalog(path, columns: dict[str, str] | None = None) -> IngestResult:
    """Parse a catalog CSV into rows, collecting malformed lines separately.

    Negative and zero parallaxes are data and pass through; a non-positive or
    unparsable parallax error rejects the row with its line number.  A missing
    mapped column raises :class:`ConfigError` naming it; a file with no data
    rows raises :class:`EmptyCatalog`.
    """
    colmap = dict(DEFAULT_COLUMNS)
    if columns:
        colmap.update(columns)
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyCatalog(f"{path} has no header row")
        for field in colmap.values():
            if field not in reader.fieldnames:
                raise ConfigError(
                    f"column {field!r} not found in {path}; "
                    f"available: {', '.join(reader.fieldnames)}"
                )
        rows: list[CatalogRow] = []
        rejects: list[RejectedRow] = []
        for line_number, raw in enumerate(reader, start=2):
            sid = raw.get(colmap["source_id"]) or ""
            try:
                plx = float(raw[colmap["parallax_mas"]])
                err = float(raw[colmap["parallax_error_mas"]])
            except (TypeError, ValueError):
                rejects.append(RejectedRow(line_number, "unparsable parallax fields"))
                continue
            if not math.isfinite(plx):
                rejects.append(RejectedRow(line_number, "parallax is not finite"))
                continue
            if not (math.isfinite(err) and err > 0):
                rejects.append(
                    RejectedRow(line_number, "parallax_error must be positive and finite")
                )
                continue
            rows.append(CatalogRow(sid, plx, err))
    if not rows and not rejects:
        raise EmptyCatalog(f"{path} contains no data rows")
    return IngestResult(rows=rows, rejects=rejects)


@dataclass(frozen=True)
class EstimateRecord:
    """Per-star output: unit-converted inputs, naive and posterior estimates."""

    source_id: str
    omega_arcsec: float
    sigma_omega_arcsec: float
    naive_distance_pc: float | None
    posterior_median_pc: float | None
    quantile_16_pc: float | None
    quantile_84_pc: float | None
    prior_name: str
    engine: str
    flags: str


ESTIMATE_FIELDS = [
    "source_id",
    "omega_arcsec",
    "sigma_omega_arcsec",
    "naive_distance_pc",
    "posterior_median_pc",
    "quantile_16_pc",
    "quantile_84_pc",
    "prior_name",
    "engine",
    "flags",
]


def batch_estimate(
    rows: list[CatalogRow],
    prior: Prior,
    engine: str = "quadrature",
    seed: int | None = None,
    mcmc: SamplerConfig | None = None,
) -> list[EstimateRecord]:
    """Estimate every catalog row; failures flag the row, never the batch.

    The naive estimate exists only for strictly positive parallaxes; the
    posterior median and 16/84% quantiles exist whenever inference succeeds
    (negative parallaxes included).  Deterministic given the seed.
    """
    if engine not in ("quadrature", "mcmc"):
        raise ConfigError(f"unknown engine {engine!r}")
    if engine == "mcmc":
        if seed is None:
            raise ConfigError("the mcmc engine requires a seed")
        if mcmc is None:
            mcmc = SamplerConfig(5000, 2000, 1, seed)
        row_seeds = [
            int(child.generate_state(1)[0])
            for child in np.random.SeedSequence(seed).spawn(len(rows))
        ]
    records: list[EstimateRecord] = []
    for i, row in enumerate(rows):
        omega = row.parallax_mas / MAS_PER_ARCSEC
        sigma = row.parallax_error_mas / MAS_PER_ARCSEC
        naive = 1.0 / omega if omega > 0 else None
        median = q16 = q84 = None
        flags = ""
        try:
            m = Measurement(omega, sigma)
            if engine == "quadrature":
                grid = quadrature_posterior(prior, m)
                q16, median, q84 = (grid.quantile(p) for p in (0.16, 0.5, 0.84))
            else:
                cs = mcmc_sample(prior, m, replace(mcmc, seed=row_seeds[i]))
                x16, x50, x84 = np.quantile(cs.pooled(), [0.16, 0.5, 0.84])
                q16, median, q84 = math.exp(x16), math.exp(x50), math.exp(x84)
                if cs.unstable:
                    flags = "SamplerUnstable"
        except (PlxdistError, ValueError) as exc:
            flags = type(exc).__name__
        records.append(
            EstimateRecord(
                source_id=row.source_id,
                omega_arcsec=omega,
                sigma_omega_arcsec=sigma,
                naive_distance_pc=naive,
                posterior_median_pc=median,
                quantile_16_pc=q16,
                quantile_84_pc=q84,
                prior_name=prior.name,
                engine=engine,
                flags=flags,
            )
        )
    return records


def _open_writer(path):
    return open(path, "w", newline="\n", encoding="utf-8")


def write_estimates_csv(records: list[EstimateRecord], path) -> None:
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ESTIMATE_FIELDS)
        for rec in records:
            writer.writerow(
                [
                    rec.source_id,
                    fmt(rec.omega_arcsec),
                    fmt(rec.sigma_omega_arcsec),
                    fmt(rec.naive_distance_pc),
                    fmt(rec.posterior_median_pc),
                    fmt(rec.quantile_16_pc),
                    fmt(rec.quantile_84_pc),
                    rec.prior_name,
                    rec.engine,
                    rec.flags,
                ]
            )


def read_estimates_csv(path) -> list[EstimateRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for raw in reader:
            records.append(
                EstimateRecord(
                    source_id=raw["source_id"],
                    omega_arcsec=float(raw["omega_arcsec"]),
                    sigma_omega_arcsec=float(raw["sigma_omega_arcsec"]),
                    naive_distance_pc=(
                        float(raw["naive_distance_pc"]) if raw["naive_distance_pc"] else None
                    ),
                    posterior_median_pc=(
                        float(raw["posterior_median_pc"])
                        if raw["posterior_median_pc"]
                        else None
                    ),
                    quantile_16_pc=(
                        float(raw["quantile_16_pc"]) if raw["quantile_16_pc"] else None
                    ),
                    quantile_84_pc=(
                        float(raw["quantile_84_pc"]) if raw["quantile_84_pc"] else None
                    ),
                    prior_name=raw["prior_name"],
                    engine=raw["engine"],
                    flags=raw["flags"],
                )
            )
    return records


SWEEP_FIELDS = [
    "index",
    "omega_arcsec",
    "omega_observed_arcsec",
    "sigma_omega_arcsec",
    "r_true_pc",
    "f",
    "prior",
    "engine",
    "posterior_median_pc",
    "sq_error",
    "rhat",
    "ess",
    "status",
]


def write_sweep_csv(records: list[SweepRecord], sigma_omega: float, engine: str, path) -> None:
    """Long-format sweep output: one row per (design point, prior)."""
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_FIELDS)
        for rec in records:
            for prior_name, res in rec.results.items():
                writer.writerow(
                    [
                        rec.index,
                        fmt(rec.omega),
                        fmt(rec.omega_observed),
                        fmt(sigma_omega),
                        fmt(rec.r_true),
                        fmt(rec.f),
                        prior_name,
                        engine,
                        fmt(res.median),
                        fmt(res.sq_error),
                        fmt(res.rhat),
                        fmt(res.ess),
                        res.error or "ok",
                    ]
                )


def write_tail_sweep_csv(rows: list[TailSweepRow], path) -> None:
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["omega_arcsec", "threshold_pc", "tail_probability"])
        for row in rows:
            writer.writerow([fmt(row.omega), fmt(row.threshold), fmt(row.tail_probability)])


def write_risk_sweep_csv(rows: list[RiskSweepRow], path) -> None:
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["r0_pc", "status", "risk", "log_risk", "lower_bound"])
        for row in rows:
            status = "divergent" if row.result.divergent else "finite"
            writer.writerow(
                [
                    fmt(row.r0),
                    status,
                    fmt(row.result.value) if not row.result.divergent else "",
                    fmt(row.result.log_value),
                    fmt(row.lower_bound),
                ]
            )


def write_ppc_csv(omega_reps, path) -> None:
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replicate", "omega_rep_arcsec"])
        for i, w in enumerate(omega_reps):
            writer.writerow([i, fmt(float(w))])


CONFIG_KEYS = {
    "prior.name",
    "prior.scale",
    "prior.shape",
    "engine",
    "seed",
    "mcmc.draws",
    "mcmc.warmup",
    "mcmc.chains",
    "sweep.J",
    "sweep.sigma_omega",
    "sweep.omega_min",
    "sweep.omega_max",
}


def load_config(path) -> dict[str, str]:
    """Flat key=value configuration; unknown keys are refused by name."""
    out: dict[str, str] = {}
    for line_number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{line_number}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(
                f"{path}:{line_number}: unknown key {key!r}; "
                f"known keys: {', '.join(sorted(CONFIG_KEYS))}"
            )
        out[key] = value
    return out
