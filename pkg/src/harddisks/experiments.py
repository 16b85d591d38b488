"""Replicated experiments: scaling laws, oracle equivalence, threshold probe.

Every replicate runs on its own derived stream, seeded from
(seed_base, replicate_index), so any failing replicate can be replayed in
isolation.  Aggregation is a deterministic fold in replicate order.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import asdict, dataclass, field

import numpy as np

from .engine import DEFAULT_MAX_ITERATIONS, IterationCapExceeded, prs_sample
from .model import ModelParams
from .rng import derive_stream
from .stats import Histogram, align_integer_histograms, chi_square_two_sample, ks_two_sample
from .validation import classical_rejection, estimate_density, nearest_neighbor_distances

# How many leading trace entries the per-cell summaries keep.
TRACE_HEAD = 6


@dataclass
class CellSummary:
    """Aggregates for one parameter cell of an experiment grid."""

    label: str
    dim: int
    radius: float
    intensity: float
    replicates: int
    failures: int
    metrics: dict[str, float] = field(default_factory=dict)
    traces: dict[str, list[float]] = field(default_factory=dict)


@dataclass
class ExperimentReport:
    """Machine-readable record of a replicated experiment."""

    kind: str
    seed_base: int
    cells: list[CellSummary]
    tests: dict[str, dict] = field(default_factory=dict)
    derived: dict = field(default_factory=dict)
    failures: int = 0

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(asdict(self), indent=indent)


def _mean_head(traces: list[list[int]], head: int) -> list[float]:
    out = []
    for t in range(head):
        vals = [trace[t] for trace in traces if len(trace) > t]
        if not vals:
            break
        out.append(float(np.mean(vals)))
    return out


def _confidence_halfwidth(values: list[float]) -> float:
    if len(values) < 2:
        return float("nan")
    return 1.96 * statistics.stdev(values) / math.sqrt(len(values))


def _run_cell(
    params: ModelParams,
    reps: int,
    seed_base: int,
    index_offset: int,
    max_iterations: int,
) -> tuple[CellSummary, list]:
    """Run one parameter cell; returns its summary and the raw per-rep rows."""
    iterations: list[int] = []
    walls: list[float] = []
    alphas: list[float] = []
    z_traces: list[list[int]] = []
    resampled: list[list[int]] = []
    rows = []
    failures = 0
    for j in range(reps):
        idx = index_offset + j
        stream = derive_stream(seed_base, idx)
        try:
            outcome = prs_sample(params, stream, max_iterations=max_iterations)
        except IterationCapExceeded as exc:
            failures += 1
            rows.append(
                {
                    "dim": params.dim,
                    "radius": params.radius,
                    "intensity": params.intensity,
                    "replicate": idx,
                    "iterations": exc.stats.iterations,
                    "wall_time": exc.stats.wall_time,
                    "points": None,
                    "alpha": None,
                    "cap_exceeded": True,
                }
            )
            continue
        stats = outcome.stats
        alpha = estimate_density(outcome.points, params)
        iterations.append(stats.iterations)
        walls.append(stats.wall_time)
        alphas.append(alpha)
        z_traces.append(stats.bad_pair_trace)
        resampled.append(stats.resampled_points)
        rows.append(
            {
                "dim": params.dim,
                "radius": params.radius,
                "intensity": params.intensity,
                "replicate": idx,
                "iterations": stats.iterations,
                "wall_time": stats.wall_time,
                "points": stats.final_count,
                "alpha": alpha,
                "cap_exceeded": False,
            }
        )
    metrics = {}
    if iterations:
        metrics = {
            "mean_iterations": float(np.mean(iterations)),
            "ci_iterations": _confidence_halfwidth([float(v) for v in iterations]),
            "mean_wall_time": float(np.mean(walls)),
            "median_wall_time": float(np.median(walls)),
            "mean_alpha": float(np.mean(alphas)),
            "mean_initial_z": float(np.mean([t[0] for t in z_traces])),
        }
    summary = CellSummary(
        label=f"d={params.dim} r={params.radius:g} lambda={params.intensity:g}",
        dim=params.dim,
        radius=params.radius,
        intensity=params.intensity,
        replicates=reps,
        failures=failures,
        metrics=metrics,
        traces={
            "mean_bad_pairs_head": _mean_head(z_traces, TRACE_HEAD),
            "mean_resampled_head": _mean_head(resampled, TRACE_HEAD),
        },
    )
    return summary, rows


def _scaling_report(
    kind: str,
    lam: float,
    radius_list,
    reps: int,
    seed_base: int,
    dim: int,
    max_iterations: int,
) -> tuple[ExperimentReport, list]:
    if reps < 1:
        raise ValueError("reps must be >= 1")
    radii = list(radius_list)
    if not radii:
        raise ValueError("radius_list must be nonempty")
    cells = []
    rows = []
    for c, radius in enumerate(radii):
        params = ModelParams(dim=dim, radius=radius, intensity=lam)
        summary, cell_rows = _run_cell(params, reps, seed_base, c * reps, max_iterations)
        cells.append(summary)
        rows.extend(cell_rows)
    report = ExperimentReport(
        kind=kind,
        seed_base=seed_base,
        cells=cells,
        failures=sum(c.failures for c in cells),
    )

    means = [c.metrics.get("mean_iterations", float("nan")) for c in cells]
    report.derived["mean_iterations"] = means
    report.derived["iteration_differences"] = [
        means[k + 1] - means[k] for k in range(len(means) - 1)
    ]
    mean_walls = [c.metrics.get("mean_wall_time", float("nan")) for c in cells]
    median_walls = [c.metrics.get("median_wall_time", float("nan")) for c in cells]
    report.derived["mean_wall_times"] = mean_walls
    report.derived["median_wall_times"] = median_walls
    report.derived["wall_time_ratios"] = [
        (median_walls[k + 1] / median_walls[k]) if median_walls[k] else float("nan")
        for k in range(len(median_walls) - 1)
    ]
    return report, rows


def iteration_scaling_experiment(
    lam: float,
    radius_list,
    reps: int,
    seed_base: int,
    dim: int = 2,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    with_rows: bool = False,
):
    """Mean iteration count per radius; the law predicts roughly constant
    increments as the radius halves."""
    report, rows = _scaling_report(
        "iteration_scaling", lam, radius_list, reps, seed_base, dim, max_iterations
    )
    return (report, rows) if with_rows else report


def runtime_scaling_experiment(
    lam: float,
    radius_list,
    reps: int,
    seed_base: int,
    dim: int = 2,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    with_rows: bool = False,
):
    """Wall time per radius; halving r should roughly quadruple the time in
    dimension 2 (work is linear in the expected point count)."""
    report, rows = _scaling_report(
        "runtime_scaling", lam, radius_list, reps, seed_base, dim, max_iterations
    )
    return (report, rows) if with_rows else report


@dataclass
class ComparisonSamples:
    """Raw material of a two-sampler comparison on one parameter cell."""

    params: ModelParams
    counts_a: list[int]
    counts_b: list[int]
    nn_a: np.ndarray
    nn_b: np.ndarray
    oracle_attempts: list[int]


def collect_comparison(
    params: ModelParams,
    n_samples: int,
    seed_base: int,
    max_attempts: int = 1_000_000,
    method: str = "grid",
) -> ComparisonSamples:
    """Draw n_samples from the resampling engine and from classical rejection.

    Engine replicate k uses stream (seed_base, k); oracle replicate k uses
    stream (seed_base, n_samples + k).
    """
    counts_a: list[int] = []
    nn_a: list[np.ndarray] = []
    for k in range(n_samples):
        outcome = prs_sample(params, derive_stream(seed_base, k), method=method)
        counts_a.append(outcome.stats.final_count)
        nn_a.append(nearest_neighbor_distances(outcome.points, params))
    counts_b: list[int] = []
    nn_b: list[np.ndarray] = []
    attempts: list[int] = []
    for k in range(n_samples):
        outcome = classical_rejection(
            params, derive_stream(seed_base, n_samples + k), max_attempts=max_attempts
        )
        counts_b.append(outcome.stats.final_count)
        attempts.append(outcome.stats.iterations + 1)
        nn_b.append(nearest_neighbor_distances(outcome.points, params))
    return ComparisonSamples(
        params=params,
        counts_a=counts_a,
        counts_b=counts_b,
        nn_a=np.concatenate(nn_a) if nn_a else np.zeros(0),
        nn_b=np.concatenate(nn_b) if nn_b else np.zeros(0),
        oracle_attempts=attempts,
    )


def oracle_equivalence_test(
    params: ModelParams,
    n_samples: int,
    seed_base: int,
    max_attempts: int = 1_000_000,
    method: str = "grid",
) -> ExperimentReport:
    """Two-sample comparison of the engine against classical rejection.

    Chi-square on point-count histograms, Kolmogorov-Smirnov on pooled
    nearest-neighbor distances.  Thresholding is left to the caller; the
    report carries raw statistics and p-values.
    """
    samples = collect_comparison(params, n_samples, seed_base, max_attempts, method)
    h1, h2 = align_integer_histograms(
        Histogram.of_integers(samples.counts_a), Histogram.of_integers(samples.counts_b)
    )
    chi_stat, chi_p = chi_square_two_sample(h1, h2)
    ks_stat, ks_p = ks_two_sample(samples.nn_a, samples.nn_b)
    cell = CellSummary(
        label=f"d={params.dim} r={params.radius:g} lambda={params.intensity:g}",
        dim=params.dim,
        radius=params.radius,
        intensity=params.intensity,
        replicates=n_samples,
        failures=0,
        metrics={
            "mean_count_engine": float(np.mean(samples.counts_a)),
            "mean_count_oracle": float(np.mean(samples.counts_b)),
            "mean_oracle_attempts": float(np.mean(samples.oracle_attempts)),
            "nn_sample_size_engine": float(samples.nn_a.shape[0]),
            "nn_sample_size_oracle": float(samples.nn_b.shape[0]),
        },
    )
    return ExperimentReport(
        kind="oracle_equivalence",
        seed_base=seed_base,
        cells=[cell],
        tests={
            "chi_square_counts": {"statistic": chi_stat, "p_value": chi_p},
            "ks_nearest_neighbor": {"statistic": ks_stat, "p_value": ks_p},
        },
    )


def supercritical_probe(
    lambdas,
    radius: float,
    reps: int,
    seed_base: int,
    dim: int = 2,
    max_iterations: int = 2000,
) -> ExperimentReport:
    """Scan intensities for loss of fast termination (descriptive only).

    Reports, per intensity, the fraction of replicates hitting the iteration
    cap and the mean iteration count of the ones that finished.  No proven
    threshold exists on the supercritical side, so nothing here is a gate.
    """
    cells = []
    for c, lam in enumerate(lambdas):
        params = ModelParams(dim=dim, radius=radius, intensity=lam)
        summary, _ = _run_cell(params, reps, seed_base, c * reps, max_iterations)
        summary.metrics["cap_exceeded_fraction"] = summary.failures / reps
        cells.append(summary)
    return ExperimentReport(
        kind="supercritical_probe",
        seed_base=seed_base,
        cells=cells,
        failures=sum(c.failures for c in cells),
    )
