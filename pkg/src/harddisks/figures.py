"""Matplotlib figures for experiment reports (rendered to files, headless)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def scaling_figure(report, path) -> None:
    """Render an iteration- or runtime-scaling report to an image file."""
    radii = [c.radius for c in report.cells]
    inv_r = [1.0 / r for r in radii]
    fig, ax = plt.subplots(figsize=(6, 4))
    if report.kind == "runtime_scaling":
        walls = [c.metrics.get("median_wall_time", np.nan) for c in report.cells]
        ax.loglog(inv_r, walls, "o-", label="median wall time")
        if walls and walls[0] > 0:
            guide = [walls[0] * (x / inv_r[0]) ** 2 for x in inv_r]
            ax.loglog(inv_r, guide, "k--", alpha=0.5, label="quadratic guide")
        ax.set_ylabel("wall time [s]")
    else:
        means = [c.metrics.get("mean_iterations", np.nan) for c in report.cells]
        cis = [c.metrics.get("ci_iterations", 0.0) for c in report.cells]
        ax.errorbar(inv_r, means, yerr=cis, fmt="o-", capsize=3, label="mean iterations")
        ax.set_xscale("log", base=2)
        ax.set_ylabel("iterations")
    ax.set_xlabel("1 / r")
    ax.set_title(report.kind.replace("_", " "))
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def comparison_figure(samples, tests, path) -> None:
    """Count histogram and nearest-neighbor ECDF overlays for one comparison."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    hi = max(max(samples.counts_a, default=0), max(samples.counts_b, default=0))
    bins = np.arange(-0.5, hi + 1.5, 1.0)
    ax1.hist(
        [samples.counts_a, samples.counts_b],
        bins=bins,
        label=["engine", "rejection oracle"],
        density=True,
    )
    chi_p = tests.get("chi_square_counts", {}).get("p_value")
    ax1.set_title(f"point counts (chi-square p={chi_p:.3g})" if chi_p is not None else "point counts")
    ax1.set_xlabel("points per configuration")
    ax1.legend()

    for nn, label in ((samples.nn_a, "engine"), (samples.nn_b, "rejection oracle")):
        if nn.size:
            xs = np.sort(nn)
            ax2.step(xs, np.arange(1, xs.size + 1) / xs.size, where="post", label=label)
    ks_p = tests.get("ks_nearest_neighbor", {}).get("p_value")
    ax2.set_title(f"nearest-neighbor ECDF (KS p={ks_p:.3g})" if ks_p is not None else "nearest-neighbor ECDF")
    ax2.set_xlabel("distance")
    ax2.axvline(2 * samples.params.radius, color="k", linestyle=":", alpha=0.6)
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
