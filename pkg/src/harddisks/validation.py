"""Classical-rejection oracle and summary statistics of configurations.

Classical rejection redraws the whole cube until it is conflict-free, so it
is exact by construction and serves as the distributional oracle for the
resampling engine.  Its expected attempt count explodes as the radius
shrinks, which confines it to small instances.
"""

from __future__ import annotations

import itertools
import math
from time import perf_counter

import numpy as np

from . import geometry
from .engine import IterationCapExceeded, RunOutcome, RunStats
from .grid import cell_indices, cells_per_axis, chebyshev_reach, conflicting_pairs
from .model import ModelParams, unit_ball_volume
from .rng import RandomStream, sample_poisson_in_box

# Above this size nearest-neighbor search goes through the cell structure.
_BRUTE_NN_LIMIT = 64


def conflict_count(points: np.ndarray, threshold: float) -> int:
    """Number of point pairs with squared distance strictly below threshold."""
    m = points.shape[0]
    if m < 2:
        return 0
    total = 0
    block = 512
    for start in range(0, m, block):
        stop = min(start + block, m)
        d2 = geometry.squared_distance_matrix(points[start:stop], points)
        total += int((d2 < threshold).sum()) - (stop - start)  # remove self-pairs
    return total // 2


def classical_rejection(
    params: ModelParams, rng: RandomStream, max_attempts: int = 1_000_000
) -> RunOutcome:
    """Exact sample by redrawing the whole cube until no pair conflicts.

    stats.iterations counts the rejected draws, so attempts = iterations + 1;
    bad_pair_trace records the conflict count of every draw (last entry 0).
    Raises IterationCapExceeded when max_attempts draws all fail, which
    signals parameters outside the oracle's feasible regime.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    t0 = perf_counter()
    rate = params.poisson_intensity
    lo = np.zeros(params.dim)
    hi = np.ones(params.dim)
    threshold = params.pair_threshold
    trace: list[int] = []
    initial_count = -1
    for _attempt in range(max_attempts):
        pts = sample_poisson_in_box(rng, rate, lo, hi)
        if initial_count < 0:
            initial_count = pts.shape[0]
        conflicts = conflict_count(pts, threshold)
        trace.append(conflicts)
        if conflicts == 0:
            stats = RunStats(
                iterations=len(trace) - 1,
                bad_pair_trace=trace,
                resampled_points=[],
                work_trace=[],
                initial_count=initial_count,
                final_count=pts.shape[0],
                wall_time=perf_counter() - t0,
            )
            return RunOutcome(points=pts, stats=stats)
    stats = RunStats(
        iterations=len(trace),
        bad_pair_trace=trace,
        resampled_points=[],
        work_trace=[],
        initial_count=initial_count,
        final_count=-1,
        wall_time=perf_counter() - t0,
    )
    raise IterationCapExceeded(
        f"no conflict-free draw within {max_attempts} attempts", stats
    )


def estimate_density(points, params: ModelParams) -> float:
    """Packing density |P| * v_d * r^d, ignoring boundary overhang.

    Requires a conflict-free configuration (disjoint balls, volumes additive).
    """
    pts = geometry.as_point_array(points, params.dim)
    n = cells_per_axis(params.radius)
    reach = chebyshev_reach(params.radius, n)
    if conflicting_pairs(pts, n, reach, params.pair_threshold):
        raise ValueError("configuration has conflicting pairs; density is undefined")
    return pts.shape[0] * unit_ball_volume(params.dim) * params.radius**params.dim


def nearest_neighbor_distances(points, params: ModelParams) -> np.ndarray:
    """Distance from each point to its nearest other point.

    Sets of fewer than two points yield an empty array.  Large sets are
    searched through the cell structure, expanding Chebyshev shells until the
    best candidate certifiably beats everything farther out.
    """
    pts = geometry.as_point_array(points, params.dim)
    m = pts.shape[0]
    if m < 2:
        return np.zeros(0)
    if m <= _BRUTE_NN_LIMIT:
        d2 = geometry.squared_distance_matrix(pts, pts)
        np.fill_diagonal(d2, np.inf)
        return np.sqrt(d2.min(axis=1))

    n = cells_per_axis(params.radius)
    size = 1.0 / n
    multi = cell_indices(pts, n)
    cells: dict[tuple, list[int]] = {}
    for i, row in enumerate(multi.tolist()):
        cells.setdefault(tuple(row), []).append(i)

    coords = pts.tolist()
    out = np.empty(m)
    for i in range(m):
        center = tuple(multi[i])
        best = math.inf
        ring = 0
        while ring < n:
            for cell in _shell(center, ring, n):
                for j in cells.get(cell, ()):
                    if j == i:
                        continue
                    d2 = _sq(coords[i], coords[j])
                    if d2 < best:
                        best = d2
            limit = ring * size
            if best <= limit * limit:
                break
            ring += 1
        out[i] = math.sqrt(best)
    return out


def _sq(a, b) -> float:
    total = 0.0
    for xa, xb in zip(a, b):
        diff = xa - xb
        total += diff * diff
    return total


def _shell(center: tuple, ring: int, n: int):
    """Valid cells at Chebyshev distance exactly ``ring`` from center."""
    if ring == 0:
        yield center
        return
    dim = len(center)
    for delta in itertools.product(range(-ring, ring + 1), repeat=dim):
        if max(abs(v) for v in delta) != ring:
            continue
        cell = tuple(c + d for c, d in zip(center, delta))
        if all(0 <= v < n for v in cell):
            yield cell
