"""Uniform cell decomposition of the unit cube for near-neighbor queries.

The cube is tiled by n^d congruent cells with n = floor(1/r), evaluated in
exact rational arithmetic on the IEEE value of r so that the cell side
s = 1/n is always >= r.  With that guarantee any two points closer than 2r
sit in cells whose indices differ by at most 2 in Chebyshev distance, and the
same radius-2 neighborhood bounds the cells that can intersect the resampling
region around a conflicting point.  Cell reaches are derived as ceil(2r/s)
(again exactly) rather than hard-coded; for every admissible r this equals 2.

Points are assigned to cells by index_k = min(floor(coord_k * n), n - 1), so
a coordinate of exactly 1.0 lands in the last cell along its axis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .geometry import as_point_array, squared_distances_pointwise
from .model import ModelParams


def cells_per_axis(radius: float) -> int:
    """Largest integer n with n * r <= 1, decided in exact rational arithmetic."""
    if not 0.0 < radius < 0.5:
        raise ValueError(f"radius must satisfy 0 < r < 1/2, got {radius!r}")
    r = Fraction(radius)
    n = int(1.0 / radius)  # within one of the answer; correct exactly below
    while Fraction(n + 1) * r <= 1:
        n += 1
    while n > 1 and Fraction(n) * r > 1:
        n -= 1
    return n


def chebyshev_reach(radius: float, n: int) -> int:
    """ceil(2r / s) for cell side s = 1/n, exact; equals 2 whenever n >= 2."""
    return int(math.ceil(2 * n * Fraction(radius)))


@dataclass
class Grid:
    """Cell occupancy map: cell multi-index (tuple) -> list of point indices."""

    dim: int
    cells_per_axis: int
    cell_size: float
    pair_reach: int
    resample_reach: int
    cells: dict[tuple[int, ...], list[int]] = field(default_factory=dict)

    @classmethod
    def empty(cls, params: ModelParams) -> "Grid":
        n = cells_per_axis(params.radius)
        reach = chebyshev_reach(params.radius, n)
        return cls(
            dim=params.dim,
            cells_per_axis=n,
            cell_size=1.0 / n,
            pair_reach=reach,
            resample_reach=reach,
            cells={},
        )

    def cell_of(self, point) -> tuple[int, ...]:
        n = self.cells_per_axis
        return tuple(min(int(float(c) * n), n - 1) for c in point)

    def insert(self, index: int, cell: tuple[int, ...]) -> None:
        self.cells.setdefault(cell, []).append(index)

    def remove(self, index: int, cell: tuple[int, ...]) -> None:
        occupants = self.cells.get(cell)
        if occupants is None or index not in occupants:
            raise KeyError(f"point {index} not present in cell {cell}")
        occupants.remove(index)
        if not occupants:
            del self.cells[cell]

    def occupancy(self) -> int:
        return sum(len(v) for v in self.cells.values())


def cell_indices(points: np.ndarray, n: int) -> np.ndarray:
    """Vectorised cell assignment, shape (m, d) int64, clamped to [0, n-1]."""
    idx = np.floor(points * n).astype(np.int64)
    np.clip(idx, 0, n - 1, out=idx)
    return idx


def linearize(multi: np.ndarray, n: int, dim: int) -> np.ndarray:
    """C-order linear cell ids; integer order on ids = lexicographic on tuples."""
    strides = n ** np.arange(dim - 1, -1, -1, dtype=np.int64)
    return multi @ strides


def unlinearize(lin: np.ndarray, n: int, dim: int) -> np.ndarray:
    out = np.empty((lin.shape[0], dim), dtype=np.int64)
    rem = lin
    for k in range(dim - 1, -1, -1):
        out[:, k] = rem % n
        rem = rem // n
    return out


def build_grid(points, params: ModelParams) -> Grid:
    """Assign every point of a set to exactly one cell."""
    grid = Grid.empty(params)
    pts = as_point_array(points, params.dim)
    if pts.shape[0]:
        multi = cell_indices(pts, grid.cells_per_axis)
        for i, row in enumerate(multi):
            grid.cells.setdefault(tuple(int(v) for v in row), []).append(i)
    return grid


def neighbor_cells(grid: Grid, cell: tuple[int, ...], reach: int):
    """All valid cells within Chebyshev distance ``reach``, lexicographic.

    Includes ``cell`` itself; ranges clip at the cube boundary, no wraparound.
    """
    n = grid.cells_per_axis
    for k, c in enumerate(cell):
        if not 0 <= c < n:
            raise ValueError(f"cell index {cell} out of range along axis {k}")
    ranges = [range(max(0, c - reach), min(n - 1, c + reach) + 1) for c in cell]
    return list(itertools.product(*ranges))


@lru_cache(maxsize=32)
def _half_offsets(dim: int, reach: int) -> tuple[tuple[int, ...], ...]:
    # Offsets that are lexicographically positive: scanning each unordered
    # cell pair exactly once, with (0,...,0) handled as the within-cell case.
    offs = []
    for delta in itertools.product(range(-reach, reach + 1), repeat=dim):
        if any(delta):
            first = next(v for v in delta if v)
            if first > 0:
                offs.append(delta)
    return tuple(offs)


@lru_cache(maxsize=32)
def _offset_matrix(dim: int, reach: int) -> np.ndarray:
    return np.array(
        list(itertools.product(range(-reach, reach + 1), repeat=dim)), dtype=np.int64
    )


def _pairs_offset_scan(pts, multi, lin, n, dim, reach, threshold):
    # Vectorised scan: for every lex-positive offset, align each cell with its
    # shifted partner via searchsorted on sorted linear ids.
    order = np.argsort(lin, kind="stable")
    lin_sorted = lin[order]
    pairs: set[tuple[int, int]] = set()

    # Within-cell pairs: any multi-occupied cell.
    uniq, start = np.unique(lin_sorted, return_index=True)
    counts = np.diff(np.append(start, lin_sorted.shape[0]))
    for s, c in zip(start[counts > 1], counts[counts > 1]):
        members = order[s : s + c]
        for a in range(c):
            for b in range(a + 1, c):
                i, j = int(members[a]), int(members[b])
                if squared_distances_pointwise(pts[i : i + 1], pts[j : j + 1])[0] < threshold:
                    pairs.add((i, j) if i < j else (j, i))

    strides = n ** np.arange(dim - 1, -1, -1, dtype=np.int64)
    for delta in _half_offsets(dim, reach):
        shifted = multi + np.asarray(delta, dtype=np.int64)
        valid = np.all((shifted >= 0) & (shifted < n), axis=1)
        if not valid.any():
            continue
        src = np.nonzero(valid)[0]
        target = lin[src] + int(np.dot(delta, strides))
        lo = np.searchsorted(lin_sorted, target, side="left")
        hi = np.searchsorted(lin_sorted, target, side="right")
        width = hi - lo
        hit = width > 0
        if not hit.any():
            continue
        src = src[hit]
        lo = lo[hit]
        width = width[hit]
        left = np.repeat(src, width)
        # Expand [lo, lo+width) ranges into partner positions.
        pos = np.repeat(lo, width) + (
            np.arange(width.sum()) - np.repeat(np.cumsum(width) - width, width)
        )
        right = order[pos]
        d2 = squared_distances_pointwise(pts[left], pts[right])
        for i, j in zip(left[d2 < threshold], right[d2 < threshold]):
            pairs.add((int(i), int(j)) if i < j else (int(j), int(i)))
    return pairs


def _pairs_cellpair_scan(pts, multi, lin, n, dim, reach, threshold):
    # Group points by cell, then examine point pairs from every unordered pair
    # of occupied cells within Chebyshev reach (including a cell with itself).
    order = np.argsort(lin, kind="stable")
    lin_sorted = lin[order]
    uniq, start = np.unique(lin_sorted, return_index=True)
    counts = np.diff(np.append(start, lin_sorted.shape[0]))
    members = [order[s : s + c] for s, c in zip(start, counts)]
    cell_multi = unlinearize(uniq, n, dim)
    pairs: set[tuple[int, int]] = set()
    k = uniq.shape[0]
    for a in range(k):
        close = np.nonzero(
            np.max(np.abs(cell_multi[a:] - cell_multi[a]), axis=1) <= reach
        )[0]
        for off in close:
            b = a + int(off)
            if b == a:
                group = members[a]
                for x in range(len(group)):
                    for y in range(x + 1, len(group)):
                        i, j = int(group[x]), int(group[y])
                        if (
                            squared_distances_pointwise(pts[i : i + 1], pts[j : j + 1])[0]
                            < threshold
                        ):
                            pairs.add((i, j) if i < j else (j, i))
            else:
                ga, gb = members[a], members[b]
                left = np.repeat(ga, len(gb))
                right = np.tile(gb, len(ga))
                d2 = squared_distances_pointwise(pts[left], pts[right])
                for i, j in zip(left[d2 < threshold], right[d2 < threshold]):
                    pairs.add((int(i), int(j)) if i < j else (int(j), int(i)))
    return pairs


def conflicting_pairs(points: np.ndarray, n: int, reach: int, threshold: float) -> set[tuple[int, int]]:
    """Grid-driven equivalent of geometry.bad_pairs, exact set equality.

    Strategy is chosen by size: the offset scan costs O(offsets * m log m) and
    wins for low dimension and large m, the cell-pair scan wins when occupied
    cells are few or the offset count blows up with dimension.
    """
    pts = as_point_array(points)
    m = pts.shape[0]
    if m < 2:
        return set()
    dim = pts.shape[1]
    multi = cell_indices(pts, n)
    lin = linearize(multi, n, dim)
    n_half = ((2 * reach + 1) ** dim - 1) // 2
    if n_half <= 16 * m:
        return _pairs_offset_scan(pts, multi, lin, n, dim, reach, threshold)
    return _pairs_cellpair_scan(pts, multi, lin, n, dim, reach, threshold)


def grid_bad_pairs(grid: Grid, points, radius: float) -> set[tuple[int, int]]:
    """Conflicting pairs of a point set via its grid; equals the all-pairs scan."""
    pts = as_point_array(points, grid.dim)
    if grid.occupancy() != pts.shape[0]:
        raise ValueError(
            f"grid holds {grid.occupancy()} indices for {pts.shape[0]} points"
        )
    threshold = (2.0 * radius) ** 2
    return conflicting_pairs(pts, grid.cells_per_axis, grid.pair_reach, threshold)


def candidate_cells(grid: Grid, bad_cells) -> list[tuple[int, ...]]:
    """Cells within resample reach of any conflict-occupied cell, lex sorted."""
    cells = list(bad_cells)
    if not cells:
        return []
    bad_multi = np.asarray(cells, dtype=np.int64)
    if bad_multi.ndim == 1:
        bad_multi = bad_multi.reshape(1, -1)
    lin = candidate_cells_linear(
        bad_multi, grid.cells_per_axis, grid.dim, grid.resample_reach
    )
    multi = unlinearize(lin, grid.cells_per_axis, grid.dim)
    return [tuple(int(v) for v in row) for row in multi]


def candidate_cells_linear(bad_multi: np.ndarray, n: int, dim: int, reach: int) -> np.ndarray:
    """Sorted unique linear ids of the resampling candidate cells."""
    if dim <= 3:
        offs = _offset_matrix(dim, reach)
        expanded = bad_multi[:, None, :] + offs[None, :, :]
        flat = expanded.reshape(-1, dim)
        ok = np.all((flat >= 0) & (flat < n), axis=1)
        return np.unique(linearize(flat[ok], n, dim))
    out: set[int] = set()
    strides = [n**k for k in range(dim - 1, -1, -1)]
    for row in bad_multi:
        ranges = [
            range(max(0, int(c) - reach), min(n - 1, int(c) + reach) + 1) for c in row
        ]
        for cell in itertools.product(*ranges):
            out.add(sum(c * s for c, s in zip(cell, strides)))
    return np.asarray(sorted(out), dtype=np.int64)
