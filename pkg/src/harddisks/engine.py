"""The partial-resampling engine: exact hard disks / hard spheres samples.

A run draws a Poisson configuration on the unit cube and then, while any two
points conflict (distance < 2r), deletes every conflicting point and lays down
a fresh Poisson configuration restricted to the union of open 2r-balls around
the deleted points.  Points outside that region are never touched, and on
termination the configuration is an exact draw from the conditioned process.

Two interchangeable implementations are provided:

* naive: conflicts found by an all-pairs scan, no incremental bookkeeping;
* grid:  conflicts and resampling candidates found through the uniform cell
  decomposition, with occupancy updated incrementally so the work done per
  iteration is proportional to the conflict neighborhood, never the whole
  grid.

Canonical draw order
--------------------
Both implementations consume the random stream identically, which turns their
bit-exact equivalence into a testable invariant:

1. counts: one uniform per cell, cells in lexicographic order (the full grid
   at initialisation, the candidate cells of the conflict region afterwards);
2. coordinates: total * dim uniforms, point-major axis-minor, in the same
   cell order;
3. the acceptance test (keep a fresh point only if it is strictly within 2r
   of a deleted point) consumes no randomness.

Fresh points that fail the acceptance test are generated and discarded inside
the iteration; they never influence later draws.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass
from functools import lru_cache
from itertools import product
from time import perf_counter

import numpy as np

from . import geometry
from .grid import (
    Grid,
    build_grid,
    candidate_cells_linear,
    cell_indices,
    cells_per_axis,
    chebyshev_reach,
    conflicting_pairs,
    unlinearize,
)
from .model import ModelParams
from .rng import RandomStream, poisson_cdf_table, poisson_counts

DEFAULT_MAX_ITERATIONS = 1_000_000


@dataclass
class RunStats:
    """Per-run trace of the resampling loop.

    bad_pair_trace holds Z_0..Z_T (conflict counts before each iteration and
    after the last); resampled_points holds, per iteration, the number of
    fresh points generated including the ones discarded by the acceptance
    test; work_trace holds per-iteration effort counters (candidate cells
    examined plus points generated plus pair checks, implementation units).
    """

    iterations: int
    bad_pair_trace: list[int]
    resampled_points: list[int]
    work_trace: list[int]
    initial_count: int
    final_count: int
    wall_time: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunOutcome:
    """A conflict-free point set and the trace of the run that produced it."""

    points: np.ndarray
    stats: RunStats


class IterationCapExceeded(RuntimeError):
    """Raised when the resampling loop hits its iteration cap.

    Carries the partial RunStats; hitting the cap signals an intensity in or
    above the regime where fast termination breaks down.
    """

    def __init__(self, message: str, stats: RunStats):
        super().__init__(message)
        self.stats = stats


class _Geom:
    """Derived constants shared by both engine paths for one parameter set."""

    __slots__ = (
        "dim", "radius", "n", "cell_size", "reach", "threshold",
        "rate", "cell_mean", "table", "n_cells",
    )

    def __init__(self, params: ModelParams):
        self.dim = params.dim
        self.radius = params.radius
        self.n = cells_per_axis(params.radius)
        self.cell_size = 1.0 / self.n
        self.reach = chebyshev_reach(params.radius, self.n)
        self.threshold = params.pair_threshold
        self.rate = params.poisson_intensity
        self.cell_mean = self.rate * self.cell_size**self.dim
        self.table = poisson_cdf_table(self.cell_mean)
        self.n_cells = self.n**self.dim


@lru_cache(maxsize=64)
def _geom_for(params: ModelParams) -> _Geom:
    return _Geom(params)


def _sqdist(a, b) -> float:
    total = 0.0
    for xa, xb in zip(a, b):
        diff = xa - xb
        total += diff * diff
    return total


def _sample_cells(lin_cells: np.ndarray, geom: _Geom, rng: RandomStream):
    """Poisson configuration restricted to the given cells (sorted linear ids).

    Returns (coords, runs) where runs lists (linear cell id, lo, hi) slices of
    coords for every cell that received at least one point, in cell order.
    """
    counts = poisson_counts(rng, geom.cell_mean, lin_cells.shape[0], geom.table)
    total = int(counts.sum())
    u = rng.uniforms((total, geom.dim))
    if total == 0:
        return np.zeros((0, geom.dim)), []
    occupied = counts > 0
    occ_cells = lin_cells[occupied]
    occ_counts = counts[occupied]
    rep = np.repeat(occ_cells, occ_counts)
    multi = unlinearize(rep, geom.n, geom.dim).astype(np.float64)
    coords = (multi + u) * geom.cell_size
    # Rounding can push a last-cell coordinate a hair past 1.0; clamp inside.
    np.clip(coords, 0.0, 1.0, out=coords)
    hi = np.cumsum(occ_counts)
    lo = hi - occ_counts
    runs = list(zip(occ_cells.tolist(), lo.tolist(), hi.tolist()))
    return coords, runs


def _initial_draw(geom: _Geom, rng: RandomStream) -> np.ndarray:
    all_cells = np.arange(geom.n_cells, dtype=np.int64)
    coords, _ = _sample_cells(all_cells, geom, rng)
    return coords


def initialize(params: ModelParams, rng: RandomStream):
    """Poisson configuration on the unit cube, realised cell by cell, plus its grid."""
    geom = _geom_for(params)
    points = _initial_draw(geom, rng)
    return points, build_grid(points, params)


def _resample_pass_naive(points: np.ndarray, pairs, geom: _Geom, rng: RandomStream):
    """One resampling pass on a plain array; returns (new points, counters)."""
    bad_idx = sorted({i for pair in pairs for i in pair})
    bad_pts = points[bad_idx]
    bad_multi = cell_indices(bad_pts, geom.n)
    cand = candidate_cells_linear(bad_multi, geom.n, geom.dim, geom.reach)
    coords, _runs = _sample_cells(cand, geom, rng)
    generated = coords.shape[0]
    if generated:
        d2 = geometry.squared_distance_matrix(coords, bad_pts)
        keep = (d2 < geom.threshold).any(axis=1)
        fresh = coords[keep]
    else:
        fresh = coords
    survivors = np.delete(points, bad_idx, axis=0)
    new_points = np.vstack([survivors, fresh]) if generated else survivors.copy()
    accept_checks = generated * len(bad_idx)
    return new_points, generated, len(cand) + generated + accept_checks


class _GridRun:
    """Stable-identifier state for the cell-accelerated path.

    Identifiers are append-only: survivors keep theirs across iterations, so
    per-iteration bookkeeping touches only the conflict neighborhood.
    Ascending identifier order coincides with the naive path's
    survivors-then-fresh row order, which is what makes the two paths
    bit-comparable.
    """

    def __init__(self, geom: _Geom):
        self.geom = geom
        self.pts: list = []  # id -> coordinate sequence
        self.cell_of: list = []  # id -> cell multi-index tuple
        self.dead: set[int] = set()
        self.cells: defaultdict[tuple, list[int]] = defaultdict(list)
        self.pairs: set[tuple[int, int]] = set()

    @classmethod
    def start(cls, geom: _Geom, rng: RandomStream) -> "_GridRun":
        run = cls(geom)
        coords = _initial_draw(geom, rng)
        run._bulk_load(coords)
        run.pairs = conflicting_pairs(coords, geom.n, geom.reach, geom.threshold)
        return run

    @classmethod
    def from_points(cls, points: np.ndarray, geom: _Geom) -> "_GridRun":
        run = cls(geom)
        run._bulk_load(points)
        run.pairs = conflicting_pairs(points, geom.n, geom.reach, geom.threshold)
        return run

    def _bulk_load(self, coords: np.ndarray) -> None:
        if coords.shape[0] == 0:
            return
        multi = cell_indices(coords, self.geom.n)
        pts = [tuple(row) for row in coords.tolist()]
        cells = [tuple(row) for row in multi.tolist()]
        self.pts = pts
        self.cell_of = cells
        for i, cell in enumerate(cells):
            self.cells[cell].append(i)

    def iterate(self, rng: RandomStream):
        """One resampling pass; returns (generated, work) counters."""
        geom = self.geom
        n, dim, reach, thr = geom.n, geom.dim, geom.reach, geom.threshold
        bad_ids = sorted({i for pair in self.pairs for i in pair})
        if not bad_ids:
            raise ValueError("no conflicting pairs: resampling precondition violated")

        bad_by_cell: dict[tuple, list] = {}
        for i in bad_ids:
            bad_by_cell.setdefault(self.cell_of[i], []).append(self.pts[i])
        for i in bad_ids:
            self.cells[self.cell_of[i]].remove(i)
            self.dead.add(i)

        bad_multi = np.asarray(sorted(bad_by_cell), dtype=np.int64).reshape(-1, dim)
        cand = candidate_cells_linear(bad_multi, n, dim, reach)
        coords, runs = _sample_cells(cand, geom, rng)
        generated = coords.shape[0]
        if generated:
            coords_list = coords.tolist()
            assigned = [tuple(row) for row in cell_indices(coords, n).tolist()]
        else:
            coords_list, assigned = [], []

        new_pairs: set[tuple[int, int]] = set()
        checks = 0
        # Neighborhood structures cached per assigned cell for the iteration.
        # Occupancy lists come from a defaultdict so lists created later for a
        # previously-empty neighbor stay visible through the cached reference.
        cache: dict[tuple, tuple[list, list]] = {}
        cells = self.cells
        pts = self.pts
        for _lin_cell, lo, hi in runs:
            for idx in range(lo, hi):
                acell = assigned[idx]
                entry = cache.get(acell)
                if entry is None:
                    ranges = [
                        range(max(0, c - reach), min(n - 1, c + reach) + 1)
                        for c in acell
                    ]
                    local_b: list = []
                    live: list = []
                    for nb in product(*ranges):
                        got = bad_by_cell.get(nb)
                        if got:
                            local_b.extend(got)
                        live.append(cells[nb])
                    entry = (local_b, live)
                    cache[acell] = entry
                local_b, live = entry
                x = coords_list[idx]
                accepted = False
                for b in local_b:
                    checks += 1
                    if _sqdist(x, b) < thr:
                        accepted = True
                        break
                if not accepted:
                    continue
                new_id = len(pts)
                for lst in live:
                    for other in lst:
                        checks += 1
                        if _sqdist(x, pts[other]) < thr:
                            new_pairs.add((other, new_id))
                pts.append(tuple(x))
                self.cell_of.append(acell)
                cells[acell].append(new_id)

        self.pairs = new_pairs
        return generated, len(cand) + generated + checks

    def alive_ids(self) -> list[int]:
        dead = self.dead
        return [i for i in range(len(self.pts)) if i not in dead]

    def export_points(self) -> np.ndarray:
        alive = self.alive_ids()
        out = np.asarray([self.pts[i] for i in alive], dtype=np.float64)
        return out.reshape(len(alive), self.geom.dim)

    def export_pairs_rowspace(self) -> set[tuple[int, int]]:
        rank = {pid: row for row, pid in enumerate(self.alive_ids())}
        return {(rank[i], rank[j]) for i, j in self.pairs}

    def to_grid(self, params: ModelParams) -> Grid:
        grid = Grid.empty(params)
        rank = {pid: row for row, pid in enumerate(self.alive_ids())}
        for cell, members in self.cells.items():
            rows = [rank[i] for i in members]
            if rows:
                grid.cells[cell] = rows
        return grid


def _check_grid_consistency(points: np.ndarray, grid: Grid, geom: _Geom) -> None:
    if grid.cells_per_axis != geom.n or grid.dim != geom.dim:
        raise ValueError("grid was built for different parameters")
    if grid.occupancy() != points.shape[0]:
        raise ValueError(
            f"grid holds {grid.occupancy()} indices for {points.shape[0]} points"
        )
    multi = cell_indices(points, geom.n)
    for cell, members in grid.cells.items():
        for i in members:
            if tuple(multi[i]) != cell:
                raise ValueError(f"point {i} listed in cell {cell}, lies in {tuple(multi[i])}")


def prs_iteration_naive(points, params: ModelParams, rng: RandomStream) -> np.ndarray:
    """One resampling pass, all-pairs conflict detection, no bookkeeping.

    Candidate cells are enumerated exactly as in the grid path so both paths
    consume the stream identically; survivors are returned bit-identical,
    fresh points appended in generation order.
    """
    geom = _geom_for(params)
    pts = geometry.as_point_array(points, params.dim)
    pairs = geometry.bad_pairs(pts, params.radius)
    if not pairs:
        raise ValueError("no conflicting pairs: resampling precondition violated")
    new_points, _, _ = _resample_pass_naive(pts, pairs, geom, rng)
    return new_points


def prs_iteration_grid(points, grid: Grid, params: ModelParams, rng: RandomStream):
    """One resampling pass through the cell structure.

    Returns (points, grid) for the next iteration.  The hot loop inside
    prs_sample keeps this state alive across iterations; this wrapper rebuilds
    it from the dense array representation, which costs O(m) on entry and exit
    (representation bookkeeping, not conflict-neighborhood work).
    """
    geom = _geom_for(params)
    pts = geometry.as_point_array(points, params.dim)
    _check_grid_consistency(pts, grid, geom)
    run = _GridRun.from_points(pts, geom)
    run.iterate(rng)
    return run.export_points(), run.to_grid(params)


def prs_sample(
    params: ModelParams,
    rng: RandomStream,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    method: str = "grid",
    paranoid: bool = False,
) -> RunOutcome:
    """Exact sample of the hard disks / hard spheres gas.

    Resamples conflict regions until no pair of points is strictly closer
    than 2r, then returns the configuration with its full trace.  ``method``
    selects the grid-accelerated loop (default) or the naive reference; both
    produce bit-identical output for the same seed.  ``paranoid`` additionally
    cross-checks the grid path's incremental conflict tracking against a full
    recomputation after every iteration.

    Raises IterationCapExceeded (carrying the partial stats) if the loop does
    not terminate within ``max_iterations``.
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    if method not in ("grid", "naive"):
        raise ValueError(f"unknown method {method!r}")
    t0 = perf_counter()
    geom = _geom_for(params)
    z_trace: list[int] = []
    resampled: list[int] = []
    work: list[int] = []

    def partial_stats(initial_count: int) -> RunStats:
        return RunStats(
            iterations=len(resampled),
            bad_pair_trace=z_trace,
            resampled_points=resampled,
            work_trace=work,
            initial_count=initial_count,
            final_count=-1,
            wall_time=perf_counter() - t0,
        )

    if method == "grid":
        run = _GridRun.start(geom, rng)
        initial_count = len(run.pts)
        z_trace.append(len(run.pairs))
        while run.pairs:
            if len(resampled) >= max_iterations:
                raise IterationCapExceeded(
                    f"no conflict-free configuration within {max_iterations} iterations",
                    partial_stats(initial_count),
                )
            generated, w = run.iterate(rng)
            if paranoid:
                recomputed = conflicting_pairs(
                    run.export_points(), geom.n, geom.reach, geom.threshold
                )
                if recomputed != run.export_pairs_rowspace():
                    raise AssertionError("incremental conflict tracking diverged")
            z_trace.append(len(run.pairs))
            resampled.append(generated)
            work.append(w)
        points = run.export_points()
    else:
        points = _initial_draw(geom, rng)
        initial_count = points.shape[0]
        pairs = geometry.bad_pairs(points, params.radius)
        z_trace.append(len(pairs))
        while pairs:
            if len(resampled) >= max_iterations:
                raise IterationCapExceeded(
                    f"no conflict-free configuration within {max_iterations} iterations",
                    partial_stats(initial_count),
                )
            m = points.shape[0]
            points, generated, w = _resample_pass_naive(points, pairs, geom, rng)
            pairs = geometry.bad_pairs(points, params.radius)
            z_trace.append(len(pairs))
            resampled.append(generated)
            work.append(w + m * (m - 1) // 2)

    # Hard postcondition on every run: the returned set is conflict-free.
    residual = conflicting_pairs(points, geom.n, geom.reach, geom.threshold)
    if residual:
        raise AssertionError(f"returned configuration has {len(residual)} conflicts")

    stats = RunStats(
        iterations=len(resampled),
        bad_pair_trace=z_trace,
        resampled_points=resampled,
        work_trace=work,
        initial_count=initial_count,
        final_count=points.shape[0],
        wall_time=perf_counter() - t0,
    )
    return RunOutcome(points=points, stats=stats)
