"""Command-line surface: sample, bounds, bench, validate.

Exit codes: 0 success, 2 usage error, 3 iteration/attempt cap exceeded,
4 validation failure, 5 I/O failure.  Every randomized command takes --seed;
when omitted a fresh seed is generated and printed to stderr so the run can
be replayed.
"""

from __future__ import annotations

import csv as csv_module
import json
import secrets
import sys
from pathlib import Path

import click

from .bounds import bounds_report
from .engine import DEFAULT_MAX_ITERATIONS, IterationCapExceeded, prs_sample
from .experiments import (
    collect_comparison,
    iteration_scaling_experiment,
    runtime_scaling_experiment,
)
from .model import MAX_DIM, ModelParams
from .render import points_to_csv, points_to_json, render_svg
from .rng import RandomStream
from .stats import Histogram, align_integer_histograms, chi_square_two_sample, ks_two_sample

EXIT_CAP = 3
EXIT_VALIDATION = 4
EXIT_IO = 5

VALIDATION_PROFILES = {
    "quick": [("d2", ModelParams(dim=2, radius=0.25, intensity=0.3), 10_000)],
    "full": [
        ("d2", ModelParams(dim=2, radius=0.25, intensity=0.3), 10_000),
        ("d1", ModelParams(dim=1, radius=0.2, intensity=0.2), 10_000),
        ("d3", ModelParams(dim=3, radius=0.25, intensity=0.2), 10_000),
    ],
}


@click.group()
def main():
    """Exact sampling of the hard disks / hard spheres gas on the unit cube."""


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = secrets.randbits(62)
        click.echo(f"generated seed: {seed}", err=True)
    return seed


def _make_params(lam: float, radius: float, dim: int) -> ModelParams:
    if not 1 <= dim <= MAX_DIM:
        raise click.UsageError(f"--dim must be in [1, {MAX_DIM}]")
    if not 0.0 < radius < 0.5:
        raise click.UsageError("--radius must satisfy 0 < r < 1/2")
    if lam < 0.0:
        raise click.UsageError("--lambda must be >= 0")
    return ModelParams(dim=dim, radius=radius, intensity=lam)


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        click.echo(f"i/o error writing {path}: {exc}", err=True)
        sys.exit(EXIT_IO)


def _parse_radii(text: str) -> list[float]:
    radii = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if "/" in token:
            num, den = token.split("/", 1)
            radii.append(float(num) / float(den))
        else:
            radii.append(float(token))
    if not radii:
        raise click.UsageError("--radii parsed to an empty list")
    return radii


@main.command()
@click.option("--lambda", "lam", type=float, required=True, help="Intensity: expected points per r-ball.")
@click.option("--radius", "-r", type=float, required=True, help="Disk radius, 0 < r < 1/2.")
@click.option("--dim", "-d", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=None, help="Random seed (generated and printed if omitted).")
@click.option("--max-iterations", type=int, default=DEFAULT_MAX_ITERATIONS, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "svg"]), default="csv", show_default=True)
@click.option("--canvas-px", type=int, default=1000, show_default=True, help="SVG canvas size in pixels.")
@click.option("--method", type=click.Choice(["grid", "naive"]), default="grid", show_default=True)
@click.option("--output", "-o", type=click.Path(path_type=Path), default=None,
              help="Output file; a <stem>.stats.json sidecar is written next to it.")
def sample(lam, radius, dim, seed, max_iterations, fmt, canvas_px, method, output):
    """Draw one exact configuration and write it as CSV, JSON or SVG.

    The stats sidecar records iterations, the conflict-count trace, point
    counts, wall time and the seed.  For a fixed seed the points output is
    byte-identical across runs (the sidecar differs in wall time only).
    """
    params = _make_params(lam, radius, dim)
    if fmt == "svg" and dim != 2:
        raise click.UsageError("--format svg requires --dim 2")
    seed = _resolve_seed(seed)
    rng = RandomStream(seed)
    try:
        outcome = prs_sample(params, rng, max_iterations=max_iterations, method=method)
    except IterationCapExceeded as exc:
        click.echo(
            f"iteration cap exceeded after {exc.stats.iterations} iterations; "
            f"intensity {lam} is in or above the slow regime for r={radius}",
            err=True,
        )
        sys.exit(EXIT_CAP)

    if fmt == "csv":
        text = points_to_csv(outcome.points)
    elif fmt == "json":
        text = points_to_json(outcome.points, params)
    else:
        text = render_svg(outcome.points, radius, canvas_px)

    sidecar = {
        "seed": seed,
        "method": method,
        "params": {"dim": dim, "radius": radius, "intensity": lam},
        "stats": outcome.stats.to_dict(),
    }
    if output is None:
        click.echo(text, nl=False)
        click.echo(
            f"points={outcome.stats.final_count} iterations={outcome.stats.iterations} "
            f"wall={outcome.stats.wall_time:.3f}s",
            err=True,
        )
    else:
        _write_text(output, text)
        _write_text(output.with_suffix(".stats.json"), json.dumps(sidecar, indent=2) + "\n")


@main.command()
@click.option("--dim", "-d", type=int, default=2, show_default=True)
@click.option("--lambda", "lam", type=float, default=None,
              help="Intensity; adds contraction and packing-density fields.")
def bounds(dim, lam):
    """Print the analytic constants report for a dimension as JSON."""
    if not 1 <= dim <= MAX_DIM:
        raise click.UsageError(f"--dim must be in [1, {MAX_DIM}]")
    if lam is not None and lam < 0:
        raise click.UsageError("--lambda must be >= 0")
    click.echo(bounds_report(dim, lam).to_json())


def _bench_table(report) -> str:
    head = f"{'radius':>12} {'reps':>6} {'fail':>5} {'mean T':>10} {'ci':>7} {'med wall':>10} {'mean alpha':>11}"
    lines = [head, "-" * len(head)]
    for cell in report.cells:
        m = cell.metrics
        lines.append(
            f"{cell.radius:>12.6g} {cell.replicates:>6d} {cell.failures:>5d} "
            f"{m.get('mean_iterations', float('nan')):>10.3f} "
            f"{m.get('ci_iterations', float('nan')):>7.2f} "
            f"{m.get('median_wall_time', float('nan')):>10.4f} "
            f"{m.get('mean_alpha', float('nan')):>11.5f}"
        )
    if report.derived.get("iteration_differences"):
        lines.append(f"iteration differences: {report.derived['iteration_differences']}")
    if report.derived.get("wall_time_ratios"):
        lines.append(f"median wall-time ratios: {report.derived['wall_time_ratios']}")
    return "\n".join(lines)


@main.command()
@click.option("--lambda", "lam", type=float, required=True)
@click.option("--radii", required=True, help="Comma list; decimals or fractions, e.g. 1/64,1/128.")
@click.option("--reps", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--mode", type=click.Choice(["iterations", "runtime"]), default="iterations", show_default=True)
@click.option("--dim", type=int, default=2, show_default=True)
@click.option("--max-iterations", type=int, default=DEFAULT_MAX_ITERATIONS, show_default=True)
@click.option("--output", "-o", type=click.Path(path_type=Path), default=None,
              help="Report JSON file (stdout if omitted).")
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None,
              help="Raw per-replicate rows as CSV.")
@click.option("--figure", type=click.Path(path_type=Path), default=None,
              help="Scaling figure rendered to this file (png/svg/pdf).")
def bench(lam, radii, reps, seed, mode, dim, max_iterations, output, csv_path, figure):
    """Replicated scaling experiment over a list of radii.

    Emits the report as JSON plus a human-readable table on stderr; exits 3
    if any replicate hit the iteration cap (count is reported either way).
    """
    if reps < 1:
        raise click.UsageError("--reps must be >= 1")
    radius_list = _parse_radii(radii)
    for r in radius_list:
        if not 0.0 < r < 0.5:
            raise click.UsageError(f"radius {r} out of range (0, 1/2)")
    if lam < 0:
        raise click.UsageError("--lambda must be >= 0")
    seed = _resolve_seed(seed)
    runner = iteration_scaling_experiment if mode == "iterations" else runtime_scaling_experiment
    report, rows = runner(
        lam, radius_list, reps, seed, dim=dim, max_iterations=max_iterations, with_rows=True
    )
    click.echo(_bench_table(report), err=True)
    if output is None:
        click.echo(report.to_json())
    else:
        _write_text(output, report.to_json() + "\n")
    if csv_path is not None:
        try:
            with open(csv_path, "w", newline="") as fh:
                writer = csv_module.DictWriter(fh, fieldnames=list(rows[0].keys()))
                writer.writeheader()
                writer.writerows(rows)
        except OSError as exc:
            click.echo(f"i/o error writing {csv_path}: {exc}", err=True)
            sys.exit(EXIT_IO)
    if figure is not None:
        from .figures import scaling_figure

        try:
            scaling_figure(report, figure)
        except OSError as exc:
            click.echo(f"i/o error writing {figure}: {exc}", err=True)
            sys.exit(EXIT_IO)
    if report.failures:
        click.echo(f"{report.failures} replicate(s) exceeded the iteration cap", err=True)
        sys.exit(EXIT_CAP)


@main.command()
@click.option("--profile", type=click.Choice(sorted(VALIDATION_PROFILES)), default="quick", show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--samples", type=int, default=None, help="Override the per-cell sample count.")
@click.option("--alpha", type=float, default=0.001, show_default=True,
              help="Family significance level; Bonferroni-split across all tests.")
@click.option("--output", "-o", type=click.Path(path_type=Path), default=None,
              help="Verdict JSON file (stdout if omitted).")
@click.option("--figure-dir", type=click.Path(path_type=Path), default=None,
              help="Render a comparison figure per cell into this directory.")
def validate(profile, seed, samples, alpha, output, figure_dir):
    """Statistical battery: engine versus classical rejection.

    Per cell, a chi-square test on point-count histograms and a KS test on
    pooled nearest-neighbor distances.  Exits 0 iff every test clears the
    Bonferroni-corrected threshold, 4 otherwise.
    """
    seed = _resolve_seed(seed)
    cells = VALIDATION_PROFILES[profile]
    n_tests = 2 * len(cells)
    cutoff = alpha / n_tests
    verdict_cells = []
    passed = True
    for offset, (label, params, default_n) in enumerate(cells):
        n = samples if samples is not None else default_n
        comp = collect_comparison(params, n, seed_base=seed + offset)
        h1, h2 = align_integer_histograms(
            Histogram.of_integers(comp.counts_a), Histogram.of_integers(comp.counts_b)
        )
        chi_stat, chi_p = chi_square_two_sample(h1, h2)
        ks_stat, ks_p = ks_two_sample(comp.nn_a, comp.nn_b)
        cell_pass = chi_p > cutoff and ks_p > cutoff
        passed = passed and cell_pass
        verdict_cells.append(
            {
                "label": label,
                "params": {"dim": params.dim, "radius": params.radius, "intensity": params.intensity},
                "samples": n,
                "chi_square_counts": {"statistic": chi_stat, "p_value": chi_p},
                "ks_nearest_neighbor": {"statistic": ks_stat, "p_value": ks_p},
                "passed": cell_pass,
            }
        )
        if figure_dir is not None:
            from .figures import comparison_figure

            figure_dir.mkdir(parents=True, exist_ok=True)
            comparison_figure(
                comp,
                {
                    "chi_square_counts": {"p_value": chi_p},
                    "ks_nearest_neighbor": {"p_value": ks_p},
                },
                figure_dir / f"validate_{label}.png",
            )
        click.echo(
            f"[{label}] chi2 p={chi_p:.4g} ks p={ks_p:.4g} cutoff={cutoff:.4g} "
            f"{'pass' if cell_pass else 'FAIL'}",
            err=True,
        )
    verdict = {
        "profile": profile,
        "seed": seed,
        "alpha": alpha,
        "per_test_cutoff": cutoff,
        "cells": verdict_cells,
        "passed": passed,
    }
    text = json.dumps(verdict, indent=2) + "\n"
    if output is None:
        click.echo(text, nl=False)
    else:
        _write_text(output, text)
    if not passed:
        sys.exit(EXIT_VALIDATION)


if __name__ == "__main__":
    main()
