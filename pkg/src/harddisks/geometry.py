"""Points, squared distances and the conflicting-pair structure.

A point set is a float64 array of shape (m, d) with coordinates in [0, 1].
A pair of distinct indices conflicts when its squared Euclidean distance is
strictly below (2r)^2; ties at exactly (2r)^2 do not conflict.  All distance
comparisons in the package are done in squared form so no square roots enter
the strict-inequality test.

Everything here is brute force by design: these functions are the reference
oracle that the grid-accelerated implementations are tested against.
"""

from __future__ import annotations

import numpy as np


def as_point_array(points, dim: int | None = None) -> np.ndarray:
    """Coerce to a float64 (m, d) array, validating a consistent dimension."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(0, dim) if arr.size == 0 else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"point set must be 2-dimensional (m, d), got shape {arr.shape}")
    if dim is not None and arr.shape[0] > 0 and arr.shape[1] != dim:
        raise ValueError(f"points have dimension {arr.shape[1]}, expected {dim}")
    return arr


def squared_distance(x, y) -> float:
    """Sum of squared coordinate differences between two points.

    Accumulates axis by axis in index order; the vectorised helpers below use
    the same association so scalar and batch code paths agree bit for bit.
    """
    xa = np.asarray(x, dtype=np.float64).ravel()
    ya = np.asarray(y, dtype=np.float64).ravel()
    if xa.shape != ya.shape:
        raise ValueError(f"dimension mismatch: {xa.shape} vs {ya.shape}")
    total = 0.0
    for k in range(xa.shape[0]):
        diff = float(xa[k]) - float(ya[k])
        total += diff * diff
    return total


def squared_distances_pointwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise squared distances between two (m, d) arrays.

    Per-axis accumulation keeps the floating-point association identical to
    squared_distance for every d in [1, 8].
    """
    acc = np.zeros(a.shape[0], dtype=np.float64)
    for k in range(a.shape[1]):
        diff = a[:, k] - b[:, k]
        acc += diff * diff
    return acc


def squared_distance_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All-pairs squared distances, shape (len(a), len(b)), same association."""
    acc = np.zeros((a.shape[0], b.shape[0]), dtype=np.float64)
    for k in range(a.shape[1]):
        diff = a[:, k, None] - b[None, :, k]
        acc += diff * diff
    return acc


def bad_pairs(points, radius: float) -> set[tuple[int, int]]:
    """All index pairs (i, j), i < j, strictly closer than 2r.

    Coincident points at distinct indices conflict (distance 0 < 2r); pairs at
    exactly 2r do not.  O(m^2), evaluated in row blocks to bound memory.
    """
    pts = as_point_array(points)
    m = pts.shape[0]
    threshold = (2.0 * radius) ** 2
    out: set[tuple[int, int]] = set()
    block = 512
    for start in range(0, m, block):
        stop = min(start + block, m)
        d2 = squared_distance_matrix(pts[start:stop], pts)
        rows, cols = np.nonzero(d2 < threshold)
        for i, j in zip(rows + start, cols):
            if i < j:
                out.add((int(i), int(j)))
    return out


def bad_points(points, radius: float) -> set[int]:
    """Union of the endpoints of bad_pairs; empty iff there are no bad pairs."""
    out: set[int] = set()
    for i, j in bad_pairs(points, radius):
        out.add(i)
        out.add(j)
    return out


def within_resampling_set(x, centers, radius: float) -> bool:
    """Whether x lies in the open Minkowski sum of ``centers`` with a 2r ball.

    True iff some center is strictly closer than 2r; an empty center set gives
    False, and boundary points at exactly 2r are excluded.
    """
    ctr = as_point_array(centers)
    if ctr.shape[0] == 0:
        return False
    xa = np.asarray(x, dtype=np.float64).ravel()
    threshold = (2.0 * radius) ** 2
    for row in ctr:
        if squared_distance(xa, row) < threshold:
            return True
    return False
