"""Command-line surface.

Exit codes: 0 success, 2 usage or configuration error, 3 data error (empty
catalog), 4 numerical failure (always for single estimates; for batched
commands only under --strict).  Everything randomized requires an explicit
--seed so runs are reproducible.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .catalog import (
    batch_estimate,
    fmt,
    ingest_catalog,
    load_config,
    write_estimates_csv,
    write_ppc_csv,
    write_risk_sweep_csv,
    write_sweep_csv,
    write_tail_sweep_csv,
)
from .credence import dominance
from .errors import ConfigError, EmptyCatalog, PlxdistError
from .experiments import (
    SweepConfig,
    run_diagnostics_summary,
    run_parallax_sweep,
    run_prop1_sweep,
    run_risk_sweep,
)
from .inference import (
    SamplerConfig,
    diagnostics,
    mcmc_sample,
    ppc_replicates,
    quadrature_posterior,
    summarize,
)
from .model import Measurement, melo_distance, mle_distance
from .priors import default_catalog, make_prior, tail_metadata

_EXIT_OK = 0
_EXIT_USAGE = 2
_EXIT_DATA = 3
_EXIT_NUMERICAL = 4


def _add_prior_options(parser, default_scale=None):
    parser.add_argument("--prior", default="half_cauchy", help="prior family name")
    parser.add_argument(
        "--prior-scale",
        type=float,
        default=default_scale,
        help="distance-scale slot of the family"
        + (f" (default {default_scale})" if default_scale else ""),
    )
    parser.add_argument("--prior-shape", type=float, default=None, help="shape slot")
    parser.add_argument(
        "--gamma-rate", type=float, default=None, help="explicit Gamma rate (overrides scale)"
    )


def _add_mcmc_options(parser):
    parser.add_argument("--draws", type=int, default=5000, help="total iterations incl. warmup")
    parser.add_argument("--warmup", type=int, default=2000)
    parser.add_argument("--chains", type=int, default=1)
    parser.add_argument("--target-accept", type=float, default=0.8)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plxdist",
        description="Distance estimation from single parallax measurements "
        "under heavy-tailed priors.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None, help="flat key=value config file")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed")
    parser.add_argument(
        "--strict", action="store_true", help="escalate numerical failures to exit code 4"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="posterior for one measurement (JSON to stdout)")
    p.add_argument("--omega", type=float, required=True, help="parallax in arcseconds")
    p.add_argument("--sigma", type=float, required=True, help="parallax noise in arcseconds")
    _add_prior_options(p)
    p.add_argument("--engine", choices=("quadrature", "mcmc"), default="quadrature")
    _add_mcmc_options(p)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p = sub.add_parser("batch", help="estimate a whole catalog CSV")
    p.add_argument("--input", required=True, help="catalog CSV (mas columns)")
    p.add_argument("--out", required=True, help="output estimates CSV")
    p.add_argument(
        "--columns",
        default=None,
        help="column mapping id=...,parallax=...,error=... (defaults to GDR1 names)",
    )
    p.add_argument("--rejects-out", default=None, help="write rejected rows here")
    _add_prior_options(p, default_scale=1000.0)
    p.add_argument("--engine", choices=("quadrature", "mcmc"), default="quadrature")
    _add_mcmc_options(p)

    p = sub.add_parser("simulate", help="parallax sweep over the prior catalog")
    p.add_argument("--out", required=True)
    p.add_argument("--j", type=int, default=500, help="number of design points")
    p.add_argument("--sigma", type=float, default=0.045)
    p.add_argument("--omega-min", type=float, default=None)
    p.add_argument("--omega-max", type=float, default=8.0)
    p.add_argument(
        "--priors",
        default=None,
        help="comma-separated family names (default: the six benchmark priors)",
    )
    p.add_argument("--gamma-rate", type=float, default=None)
    p.add_argument("--engine", choices=("quadrature", "mcmc"), default="quadrature")
    p.add_argument("--noisy", action="store_true", help="jitter observed parallaxes")
    _add_mcmc_options(p)

    p = sub.add_parser("tail-sweep", help="tail probability under a growing threshold")
    p.add_argument("--out", required=True)
    _add_prior_options(p)
    p.add_argument("--growth", choices=("inverse_square", "inverse_cube"), default="inverse_square")
    p.add_argument("--omega-start", type=float, default=1.0)
    p.add_argument("--omega-stop", type=float, default=0.01)
    p.add_argument("--num", type=int, default=9)
    p.add_argument("--sigma", type=float, default=1.0)

    p = sub.add_parser("risk-sweep", help="posterior-risk integrals with lower bounds")
    p.add_argument("--out", required=True)
    _add_prior_options(p)
    p.add_argument("--r0", default="2,5,10", help="comma-separated reference distances")
    p.add_argument("--a", type=float, default=1.0, help="likelihood kernel constant A")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--r-max", type=float, default=None, help="truncate the integral here")

    p = sub.add_parser("diagnose", help="mean sampler diagnostics per prior")
    p.add_argument("--out", required=True)
    p.add_argument("--j", type=int, default=12)
    p.add_argument("--sigma", type=float, default=0.045)
    p.add_argument("--omega-min", type=float, default=None)
    p.add_argument("--omega-max", type=float, default=8.0)
    p.add_argument("--priors", default=None)
    _add_mcmc_options(p)

    p = sub.add_parser("ppc", help="replicated parallaxes from the posterior predictive")
    p.add_argument("--out", required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    _add_prior_options(p)
    p.add_argument("--n-rep", type=int, default=1000)
    _add_mcmc_options(p)

    p = sub.add_parser("dominance", help="tail dominance relation of two priors")
    p.add_argument("first", help="prior family name")
    p.add_argument("second", help="prior family name")

    return parser


_CONFIG_MAPPING = {
    "prior.name": ("prior", "--prior", str),
    "prior.scale": ("prior_scale", "--prior-scale", float),
    "prior.shape": ("prior_shape", "--prior-shape", float),
    "engine": ("engine", "--engine", str),
    "seed": ("seed", "--seed", int),
    "mcmc.draws": ("draws", "--draws", int),
    "mcmc.warmup": ("warmup", "--warmup", int),
    "mcmc.chains": ("chains", "--chains", int),
    "sweep.J": ("j", "--j", int),
    "sweep.sigma_omega": ("sigma", "--sigma", float),
    "sweep.omega_min": ("omega_min", "--omega-min", float),
    "sweep.omega_max": ("omega_max", "--omega-max", float),
}


def _apply_config(args, argv):
    """Fill config-file values into args; explicit command-line flags win."""
    if args.config is None:
        return
    cfg = load_config(args.config)
    given = set(argv)
    for key, value in cfg.items():
        attr, flag, cast = _CONFIG_MAPPING[key]
        if not hasattr(args, attr) or flag in given:
            continue
        try:
            setattr(args, attr, cast(value))
        except ValueError as exc:
            raise ConfigError(f"config key {key}: {exc}") from exc


def _prior_from_args(args):
    return make_prior(
        args.prior,
        scale=args.prior_scale,
        shape=args.prior_shape,
        rate=getattr(args, "gamma_rate", None),
    )


def _sampler_config(args, seed: int) -> SamplerConfig:
    return SamplerConfig(
        n_draws=args.draws,
        n_warmup=args.warmup,
        n_chains=args.chains,
        seed=seed,
        target_accept=args.target_accept,
    )


def _require_seed(args, parser, why: str):
    if args.seed is None:
        parser.error(f"--seed is required for {why}")


def _priors_from_list(spec: str | None, gamma_rate: float | None):
    catalog = default_catalog()
    if gamma_rate is not None:
        from .priors import Gamma

        catalog["gamma"] = Gamma(3.0, gamma_rate)
    if spec is None:
        return tuple(catalog.items())
    chosen = []
    for name in spec.split(","):
        prior = make_prior(name)
        chosen.append((prior.name, catalog.get(prior.name, prior)))
    return tuple(chosen)


def _cmd_estimate(args, parser) -> int:
    prior = _prior_from_args(args)
    m = Measurement(args.omega, args.sigma)
    tail = tail_metadata(prior).pcred
    if args.engine == "mcmc":
        _require_seed(args, parser, "the mcmc engine")
        cs = mcmc_sample(prior, m, _sampler_config(args, args.seed))
        pooled = cs.pooled()
        qs = {p: float(math.exp(np.quantile(pooled, p))) for p in (0.16, 0.25, 0.5, 0.75, 0.84)}
        payload = {
            "posterior_median_pc": qs[0.5],
            "quantiles_pc": {str(k): v for k, v in qs.items()},
            "engine": "mcmc",
            "diagnostics": (
                {k: v for k, v in diagnostics(cs).rhat.items()} if args.chains >= 2 else None
            ),
        }
    else:
        grid = quadrature_posterior(prior, m)
        summary = summarize(grid, tail)
        payload = {
            "posterior_median_pc": summary.median,
            "posterior_mode_pc": summary.mode,
            "posterior_mean_pc": summary.mean,
            "posterior_sd_pc": summary.sd,
            "quantiles_pc": {str(k): v for k, v in summary.quantiles.items()},
            "engine": "quadrature",
        }
    payload.update(
        {
            "omega_arcsec": args.omega,
            "sigma_omega_arcsec": args.sigma,
            "prior": prior.name,
            "prior_params": prior.params(),
            "naive_distance_pc": mle_distance(m),
            "melo_distance_pc": melo_distance(m),
        }
    )
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return _EXIT_OK


def _parse_columns(spec: str | None) -> dict[str, str] | None:
    if spec is None:
        return None
    rename = {"id": "source_id", "parallax": "parallax_mas", "error": "parallax_error_mas"}
    out = {}
    for part in spec.split(","):
        if "=" not in part:
            raise ConfigError(f"bad column mapping {part!r}; expected key=column")
        key, col = part.split("=", 1)
        if key.strip() not in rename:
            raise ConfigError(f"unknown column key {key!r}; use id, parallax, error")
        out[rename[key.strip()]] = col.strip()
    return out


def _cmd_batch(args, parser) -> int:
    if args.engine == "mcmc":
        _require_seed(args, parser, "the mcmc engine")
    prior = _prior_from_args(args)
    result = ingest_catalog(args.input, _parse_columns(args.columns))
    mcmc = _sampler_config(args, args.seed or 0) if args.engine == "mcmc" else None
    records = batch_estimate(result.rows, prior, engine=args.engine, seed=args.seed, mcmc=mcmc)
    write_estimates_csv(records, args.out)
    if args.rejects_out:
        with open(args.rejects_out, "w", encoding="utf-8") as fh:
            fh.write("line_number,reason\n")
            for rej in result.rejects:
                fh.write(f"{rej.line_number},{rej.reason}\n")
    n_failed = sum(1 for r in records if r.flags)
    print(
        f"estimated {len(records)} rows ({n_failed} flagged), "
        f"rejected {len(result.rejects)} malformed rows -> {args.out}"
    )
    if args.strict and n_failed:
        print("numerical failures present and --strict set", file=sys.stderr)
        return _EXIT_NUMERICAL
    return _EXIT_OK


def _cmd_simulate(args, parser) -> int:
    if args.engine == "mcmc" or args.noisy:
        _require_seed(args, parser, "randomized simulation")
    cfg = SweepConfig(
        J=args.j,
        omega_min=args.omega_min,
        omega_max=args.omega_max,
        sigma_omega=args.sigma,
        priors=_priors_from_list(args.priors, args.gamma_rate),
        engine=args.engine,
        mcmc=_sampler_config(args, args.seed or 0),
        seed=args.seed or 0,
        noisy=args.noisy,
    )
    records = run_parallax_sweep(cfg)
    write_sweep_csv(records, cfg.sigma_omega, cfg.engine, args.out)
    n_failed = sum(1 for rec in records for res in rec.results.values() if res.error)
    print(f"swept {len(records)} design points -> {args.out} ({n_failed} failures)")
    if args.strict and n_failed:
        return _EXIT_NUMERICAL
    return _EXIT_OK


def _cmd_tail_sweep(args, parser) -> int:
    prior = _prior_from_args(args)
    omegas = np.geomspace(args.omega_start, args.omega_stop, args.num)
    rows = run_prop1_sweep(prior, growth=args.growth, omegas=omegas, sigma_omega=args.sigma)
    write_tail_sweep_csv(rows, args.out)
    print(f"tail sweep of {prior.name} -> {args.out}")
    return _EXIT_OK


def _cmd_risk_sweep(args, parser) -> int:
    prior = _prior_from_args(args)
    r0s = [float(v) for v in args.r0.split(",")]
    rows = run_risk_sweep(prior, r0s, a=args.a, omega=args.omega, r_max=args.r_max)
    write_risk_sweep_csv(rows, args.out)
    divergent = sum(1 for row in rows if row.result.divergent)
    print(f"risk sweep of {prior.name} -> {args.out} ({divergent} divergent)")
    return _EXIT_OK


def _cmd_diagnose(args, parser) -> int:
    _require_seed(args, parser, "sampler diagnostics")
    if args.chains < 2:
        parser.error("diagnostics need --chains >= 2 for split R-hat")
    cfg = SweepConfig(
        J=args.j,
        omega_min=args.omega_min,
        omega_max=args.omega_max,
        sigma_omega=args.sigma,
        priors=_priors_from_list(args.priors, None),
        engine="mcmc",
        mcmc=_sampler_config(args, args.seed),
        seed=args.seed,
    )
    summary = run_diagnostics_summary(cfg)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("prior,mean_ess,mean_rhat,n_points,n_degenerate\n")
        for name, diag in summary.items():
            fh.write(
                f"{name},{fmt(diag.mean_ess)},{fmt(diag.mean_rhat)},"
                f"{diag.n_points},{diag.n_degenerate}\n"
            )
    print(f"diagnosed {len(summary)} priors -> {args.out}")
    return _EXIT_OK


def _cmd_ppc(args, parser) -> int:
    _require_seed(args, parser, "posterior predictive replication")
    prior = _prior_from_args(args)
    m = Measurement(args.omega, args.sigma)
    cs = mcmc_sample(prior, m, _sampler_config(args, args.seed))
    reps = ppc_replicates(prior, m, cs, args.n_rep, args.seed)
    write_ppc_csv(reps, args.out)
    print(f"{args.n_rep} predictive replicates -> {args.out}")
    return _EXIT_OK


def _cmd_dominance(args, parser) -> int:
    first = make_prior(args.first)
    second = make_prior(args.second)
    t1 = tail_metadata(first).pcred
    t2 = tail_metadata(second).pcred
    if t1 is None or t2 is None:
        raise ConfigError("compact-support priors carry no tail tuple to compare")
    print(dominance(t1, t2).value)
    return _EXIT_OK


_COMMANDS = {
    "estimate": _cmd_estimate,
    "batch": _cmd_batch,
    "simulate": _cmd_simulate,
    "tail-sweep": _cmd_tail_sweep,
    "risk-sweep": _cmd_risk_sweep,
    "diagnose": _cmd_diagnose,
    "ppc": _cmd_ppc,
    "dominance": _cmd_dominance,
}


def main(argv=None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(argv)
    try:
        _apply_config(args, argv)
        return _COMMANDS[args.command](args, parser)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except EmptyCatalog as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_DATA
    except (PlxdistError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL


def entrypoint() -> None:
    raise SystemExit(main())
