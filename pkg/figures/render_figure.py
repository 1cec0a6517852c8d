#!/usr/bin/env python3
"""Render a figure from an experiment CSV, plus a sidecar CSV of the series.

Standalone script: one positional input CSV, --kind, --out.  The sidecar
(out path + ".data.csv" unless overridden) holds exactly the plotted series so
figures can be golden-file tested; for pass-through kinds the values are
copied verbatim, never re-parsed through floats.

Input schemas by kind:
  error_sweep         prior, f, sq_error            (sweep CSV, long format)
  naive_vs_posterior  source_id, naive_distance_pc, posterior_median_pc
  likelihood_shape    omega, r, density
  prior_tails         prior, r, density
  ppc_density         omega_rep_arcsec              (one replicate per row)

Extra columns are ignored.  Rendering never touches the input file.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

KINDS = (
    "likelihood_shape",
    "prior_tails",
    "error_sweep",
    "naive_vs_posterior",
    "ppc_density",
)

REQUIRED_COLUMNS = {
    "error_sweep": ["prior", "f", "sq_error"],
    "naive_vs_posterior": ["source_id", "naive_distance_pc", "posterior_median_pc"],
    "likelihood_shape": ["omega", "r", "density"],
    "prior_tails": ["prior", "r", "density"],
    "ppc_density": ["omega_rep_arcsec"],
}


class RenderError(Exception):
    pass


def read_rows(path: Path, kind: str) -> list[dict[str, str]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in REQUIRED_COLUMNS[kind] if col not in header]
        if missing:
            raise RenderError(
                f"{path} does not match the {kind} schema: "
                f"missing columns {missing}, found {header}"
            )
        rows = list(reader)
    if not rows:
        raise RenderError(f"{path} has no data rows; nothing to plot")
    return rows


def write_sidecar(path: Path, columns: list[str], rows: list[list[str]]) -> None:
    with path.open("w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def group_in_order(rows: list[dict[str, str]], key: str):
    order: list[str] = []
    groups: dict[str, list[dict[str, str]]] = {}
    for row in rows:
        label = row[key]
        if label not in groups:
            groups[label] = []
            order.append(label)
        groups[label].append(row)
    return [(label, groups[label]) for label in order]


def render_error_sweep(rows, ax):
    for prior, chunk in group_in_order(rows, "prior"):
        xs = [float(r["f"]) for r in chunk]
        ys = [float(r["sq_error"]) for r in chunk]
        ax.plot(xs, ys, label=prior, linewidth=1.2)
    ax.set_yscale("log")  # errors span many orders of magnitude
    ax.set_xlabel("fractional parallax error f")
    ax.set_ylabel("squared error (pc$^2$)")
    ax.legend(fontsize=8)
    sidecar = [[r["prior"], r["f"], r["sq_error"]] for r in rows]
    return ["prior", "f", "sq_error"], sidecar


def render_naive_vs_posterior(rows, ax):
    plotted = [
        r for r in rows if r["naive_distance_pc"] and r["posterior_median_pc"]
    ]
    if not plotted:
        raise RenderError("no rows carry both a naive and a posterior estimate")
    xs = [float(r["naive_distance_pc"]) for r in plotted]
    ys = [float(r["posterior_median_pc"]) for r in plotted]
    ax.scatter(xs, ys, s=12, alpha=0.7)
    lo = min(min(xs), min(ys))
    hi = max(max(xs), max(ys))
    ax.plot([lo, hi], [lo, hi], "r:", label="identity")
    ax.set_xlabel("naive inverse-parallax distance (pc)")
    ax.set_ylabel("posterior median distance (pc)")
    ax.legend(fontsize=8)
    sidecar = [
        [r["source_id"], r["naive_distance_pc"], r["posterior_median_pc"]] for r in plotted
    ]
    return ["source_id", "naive_distance_pc", "posterior_median_pc"], sidecar


def render_likelihood_shape(rows, ax):
    for omega, chunk in group_in_order(rows, "omega"):
        xs = [float(r["r"]) for r in chunk]
        ys = [float(r["density"]) for r in chunk]
        ax.plot(xs, ys, label=f"omega={omega}", linewidth=1.2)
    ax.set_xlabel("distance r (pc)")
    ax.set_ylabel("likelihood")
    ax.legend(fontsize=8)
    sidecar = [[r["omega"], r["r"], r["density"]] for r in rows]
    return ["omega", "r", "density"], sidecar


def render_prior_tails(rows, ax):
    for prior, chunk in group_in_order(rows, "prior"):
        xs = [float(r["r"]) for r in chunk]
        ys = [float(r["density"]) for r in chunk]
        ax.plot(xs, ys, label=prior, linewidth=1.2)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("distance r (pc)")
    ax.set_ylabel("prior density")
    ax.legend(fontsize=8)
    sidecar = [[r["prior"], r["r"], r["density"]] for r in rows]
    return ["prior", "r", "density"], sidecar


def render_ppc_density(rows, ax, observed: float | None = None, bins: int = 50):
    values = [float(r["omega_rep_arcsec"]) for r in rows]
    counts, edges, _ = ax.hist(values, bins=bins, density=True, alpha=0.6)
    if observed is not None:
        ax.axvline(observed, color="k", linestyle="--", label="observed")
        ax.legend(fontsize=8)
    ax.set_xlabel("replicated parallax (arcsec)")
    ax.set_ylabel("density")
    centers = [(edges[i] + edges[i + 1]) / 2.0 for i in range(len(counts))]
    sidecar = [
        [format(c, ".17g"), format(d, ".17g")] for c, d in zip(centers, counts)
    ]
    return ["bin_center", "density"], sidecar


def render(input_csv, kind: str, out, sidecar=None, observed: float | None = None):
    """Render one figure; returns the matplotlib Figure (caller closes)."""
    input_csv = Path(input_csv)
    out = Path(out)
    sidecar_path = Path(sidecar) if sidecar else out.with_suffix(out.suffix + ".data.csv")
    rows = read_rows(input_csv, kind)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    try:
        if kind == "error_sweep":
            columns, series = render_error_sweep(rows, ax)
        elif kind == "naive_vs_posterior":
            columns, series = render_naive_vs_posterior(rows, ax)
        elif kind == "likelihood_shape":
            columns, series = render_likelihood_shape(rows, ax)
        elif kind == "prior_tails":
            columns, series = render_prior_tails(rows, ax)
        else:
            columns, series = render_ppc_density(rows, ax, observed=observed)
    except RenderError:
        plt.close(fig)
        raise
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    write_sidecar(sidecar_path, columns, series)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input_csv", help="experiment CSV to plot")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--sidecar", default=None, help="sidecar CSV path")
    parser.add_argument(
        "--observed", type=float, default=None, help="observed parallax marker (ppc_density)"
    )
    args = parser.parse_args(argv)
    try:
        fig = render(args.input_csv, args.kind, args.out, args.sidecar, args.observed)
        plt.close(fig)
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
