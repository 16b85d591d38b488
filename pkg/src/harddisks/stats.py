"""Histograms and two-sample tests used by the validation harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats as sci_stats

# Minimum expected count per pooled bin for the chi-square approximation.
MIN_EXPECTED = 5.0


@dataclass
class Histogram:
    """Counts over sorted bin edges; len(counts) == len(edges) - 1."""

    edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.edges.ndim != 1 or self.counts.ndim != 1:
            raise ValueError("edges and counts must be one-dimensional")
        if self.edges.shape[0] != self.counts.shape[0] + 1:
            raise ValueError("need len(edges) == len(counts) + 1")
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def of_integers(cls, values, upper: int | None = None) -> "Histogram":
        """Histogram of non-negative integers with one unit-wide bin per value."""
        vals = np.asarray(values, dtype=np.int64)
        hi = int(vals.max()) if vals.size else 0
        if upper is not None:
            hi = max(hi, upper)
        edges = np.arange(hi + 2, dtype=np.float64) - 0.5
        counts = np.bincount(vals, minlength=hi + 1)
        return cls(edges=edges, counts=counts)


def align_integer_histograms(h1: Histogram, h2: Histogram) -> tuple[Histogram, Histogram]:
    """Re-bin two integer-count histograms onto a shared edge vector."""
    width = max(h1.counts.shape[0], h2.counts.shape[0])
    edges = np.arange(width + 1, dtype=np.float64) - 0.5

    def pad(h: Histogram) -> Histogram:
        counts = np.zeros(width, dtype=np.int64)
        counts[: h.counts.shape[0]] = h.counts
        return Histogram(edges=edges, counts=counts)

    return pad(h1), pad(h2)


def _pool_low_count_bins(c1: np.ndarray, c2: np.ndarray):
    """Merge adjacent bins until every expected count reaches MIN_EXPECTED.

    Expectations are the usual homogeneity ones, E_si = n_s * (c1+c2)_i / n.
    Greedy left-to-right accumulation; a deficient trailing group is folded
    into its predecessor.
    """
    n1, n2 = c1.sum(), c2.sum()
    n = n1 + n2
    pooled1, pooled2 = [], []
    acc1 = acc2 = 0
    for a, b in zip(c1, c2):
        acc1 += a
        acc2 += b
        both = acc1 + acc2
        if min(n1, n2) * both / n >= MIN_EXPECTED:
            pooled1.append(acc1)
            pooled2.append(acc2)
            acc1 = acc2 = 0
    if acc1 or acc2:
        if pooled1:
            pooled1[-1] += acc1
            pooled2[-1] += acc2
        else:
            pooled1, pooled2 = [acc1], [acc2]
    return np.asarray(pooled1, dtype=np.float64), np.asarray(pooled2, dtype=np.float64)


def chi_square_two_sample(h1: Histogram, h2: Histogram) -> tuple[float, float]:
    """Two-sample chi-square on matching-edge histograms, low bins pooled.

    Returns (statistic, p_value) with dof = pooled bins - 1.
    """
    if h1.edges.shape != h2.edges.shape or not np.array_equal(h1.edges, h2.edges):
        raise ValueError("histograms must share identical bin edges")
    n1, n2 = h1.total, h2.total
    if n1 == 0 or n2 == 0:
        raise ValueError("degenerate histogram: empty sample")
    c1, c2 = _pool_low_count_bins(h1.counts, h2.counts)
    if c1.shape[0] < 2:
        raise ValueError("degenerate histograms: fewer than two pooled bins")
    n = n1 + n2
    stat = 0.0
    for o1, o2 in zip(c1, c2):
        e1 = n1 * (o1 + o2) / n
        e2 = n2 * (o1 + o2) / n
        stat += (o1 - e1) ** 2 / e1 + (o2 - e2) ** 2 / e2
    dof = c1.shape[0] - 1
    return float(stat), float(sci_stats.chi2.sf(stat, dof))


def ks_two_sample(xs, ys) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic with asymptotic p-value."""
    x = np.sort(np.asarray(xs, dtype=np.float64))
    y = np.sort(np.asarray(ys, dtype=np.float64))
    n1, n2 = x.shape[0], y.shape[0]
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be nonempty")
    grid = np.concatenate([x, y])
    cdf1 = np.searchsorted(x, grid, side="right") / n1
    cdf2 = np.searchsorted(y, grid, side="right") / n2
    d = float(np.max(np.abs(cdf1 - cdf2)))
    effective = np.sqrt(n1 * n2 / (n1 + n2))
    p = float(special.kolmogorov(effective * d))
    return d, p
