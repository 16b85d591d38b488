import math

import numpy as np
import pytest

from harddisks.engine import (
    IterationCapExceeded,
    initialize,
    prs_iteration_grid,
    prs_iteration_naive,
    prs_sample,
)
from harddisks.geometry import bad_pairs
from harddisks.grid import build_grid, grid_bad_pairs
from harddisks.model import ModelParams
from harddisks.rng import RandomStream, derive_stream


def test_initialize_zero_intensity():
    params = ModelParams(dim=2, radius=0.1, intensity=0.0)
    points, grid = initialize(params, RandomStream(0))
    assert points.shape == (0, 2)
    assert grid.cells == {}
    out = prs_sample(params, RandomStream(0))
    assert out.stats.iterations == 0
    assert out.stats.final_count == 0


def test_initialize_mean_count():
    # expected initial count is lambda / (pi r^2), independent of the grid
    params = ModelParams(dim=2, radius=1 / 200, intensity=0.5)
    expected = 0.5 * 200**2 / math.pi
    counts = [
        initialize(params, derive_stream(42, k))[0].shape[0] for k in range(100)
    ]
    assert abs(np.mean(counts) - expected) / expected < 0.02


def test_initialize_grid_consistent():
    params = ModelParams(dim=2, radius=0.05, intensity=0.2)
    points, grid = initialize(params, RandomStream(3))
    assert grid.occupancy() == points.shape[0]
    rebuilt = build_grid(points, params)
    assert {c: sorted(v) for c, v in grid.cells.items()} == {
        c: sorted(v) for c, v in rebuilt.cells.items()
    }


def test_initial_conflicts_below_pair_counting_envelope():
    # E Z0 <= lambda_r^2 * v_d (2r)^d / 2; boundary effects only reduce it
    params = ModelParams(dim=2, radius=0.05, intensity=0.3)
    lam_r = params.poisson_intensity
    envelope = lam_r**2 * math.pi * (2 * params.radius) ** 2 / 2
    z0 = [
        prs_sample(params, derive_stream(2, k)).stats.bad_pair_trace[0]
        for k in range(200)
    ]
    assert np.mean(z0) < envelope


def test_subcritical_limit_terminates_immediately():
    params = ModelParams(dim=2, radius=0.1, intensity=0.001)
    out = prs_sample(params, RandomStream(5))
    assert out.stats.iterations <= 1
    assert bad_pairs(out.points, params.radius) == set()


def test_run_is_deterministic_given_seed():
    params = ModelParams(dim=2, radius=0.03, intensity=0.2)
    a = prs_sample(params, RandomStream(11))
    b = prs_sample(params, RandomStream(11))
    assert np.array_equal(a.points, b.points)
    assert a.stats.bad_pair_trace == b.stats.bad_pair_trace
    assert a.stats.resampled_points == b.stats.resampled_points


def test_naive_and_grid_agree_bit_for_bit():
    for seed in range(25):
        params = ModelParams(dim=2, radius=0.04, intensity=0.2)
        g = prs_sample(params, RandomStream(seed), method="grid", paranoid=True)
        n = prs_sample(params, RandomStream(seed), method="naive")
        assert np.array_equal(g.points, n.points)
        assert g.stats.bad_pair_trace == n.stats.bad_pair_trace
        assert g.stats.resampled_points == n.stats.resampled_points


def test_naive_and_grid_agree_in_other_dimensions():
    for dim, radius in ((1, 0.05), (3, 0.12)):
        for seed in range(8):
            params = ModelParams(dim=dim, radius=radius, intensity=0.1)
            g = prs_sample(params, RandomStream(seed), method="grid", paranoid=True)
            n = prs_sample(params, RandomStream(seed), method="naive")
            assert np.array_equal(g.points, n.points)
            assert g.stats.bad_pair_trace == n.stats.bad_pair_trace


def test_returned_sets_are_always_conflict_free():
    for seed in range(30):
        params = ModelParams(dim=2, radius=0.06, intensity=0.25)
        out = prs_sample(params, RandomStream(seed))
        assert bad_pairs(out.points, params.radius) == set()


def test_stats_trace_shape():
    params = ModelParams(dim=2, radius=0.03, intensity=0.25)
    out = prs_sample(params, RandomStream(2))
    s = out.stats
    assert len(s.bad_pair_trace) == s.iterations + 1
    assert len(s.resampled_points) == s.iterations
    assert len(s.work_trace) == s.iterations
    assert s.bad_pair_trace[-1] == 0
    assert all(z > 0 for z in s.bad_pair_trace[:-1])
    assert s.final_count == out.points.shape[0]
    assert s.wall_time >= 0.0


def test_iteration_cap_carries_partial_stats():
    # far supercritical: conflicts multiply instead of dying out
    params = ModelParams(dim=2, radius=0.05, intensity=3.0)
    with pytest.raises(IterationCapExceeded) as info:
        prs_sample(params, RandomStream(1), max_iterations=5)
    stats = info.value.stats
    assert stats.iterations == 5
    assert len(stats.bad_pair_trace) == 6
    assert stats.final_count == -1


def test_invalid_arguments():
    params = ModelParams(dim=2, radius=0.05, intensity=0.1)
    with pytest.raises(ValueError):
        prs_sample(params, RandomStream(0), max_iterations=0)
    with pytest.raises(ValueError):
        prs_sample(params, RandomStream(0), method="fancy")
    with pytest.raises(ValueError):
        ModelParams(dim=2, radius=0.6, intensity=0.1)
    with pytest.raises(ValueError):
        ModelParams(dim=0, radius=0.1, intensity=0.1)
    with pytest.raises(ValueError):
        ModelParams(dim=2, radius=0.1, intensity=-1.0)


def test_iteration_requires_conflicts():
    params = ModelParams(dim=2, radius=0.05, intensity=0.1)
    points = np.array([[0.1, 0.1], [0.9, 0.9]])
    with pytest.raises(ValueError):
        prs_iteration_naive(points, params, RandomStream(0))
    grid = build_grid(points, params)
    with pytest.raises(ValueError):
        prs_iteration_grid(points, grid, params, RandomStream(0))


def test_iteration_grid_rejects_inconsistent_grid():
    params = ModelParams(dim=2, radius=0.05, intensity=0.1)
    points = np.array([[0.1, 0.1], [0.105, 0.1]])
    grid = build_grid(np.array([[0.9, 0.9], [0.905, 0.9]]), params)
    with pytest.raises(ValueError):
        prs_iteration_grid(points, grid, params, RandomStream(0))


def _one_conflict_instance():
    # conflicting pair in the middle, spectators far away
    r = 0.05
    params = ModelParams(dim=2, radius=r, intensity=0.2)
    points = np.array(
        [
            [0.05, 0.05],
            [0.95, 0.05],
            [0.5, 0.5],
            [0.5, 0.5 + 1.8 * r],
            [0.05, 0.95],
            [0.95, 0.95],
        ]
    )
    assert bad_pairs(points, r) == {(2, 3)}
    return params, points


def test_iteration_resamples_only_the_conflict_region():
    params, points = _one_conflict_instance()
    out = prs_iteration_naive(points, params, RandomStream(9))
    survivors = np.delete(points, [2, 3], axis=0)
    assert np.array_equal(out[: len(survivors)], survivors)
    # removed coordinates never reappear (continuous resampling)
    for row in out[len(survivors):]:
        assert not np.array_equal(row, points[2])
        assert not np.array_equal(row, points[3])
    # fresh points are strictly within 2r of a removed conflict point
    for row in out[len(survivors):]:
        d2 = ((points[2:4] - row) ** 2).sum(axis=1)
        assert d2.min() < (2 * params.radius) ** 2


def test_iteration_paths_are_bit_identical():
    params, points = _one_conflict_instance()
    grid = build_grid(points, params)
    naive_out = prs_iteration_naive(points, params, RandomStream(33))
    grid_out, new_grid = prs_iteration_grid(points, grid, params, RandomStream(33))
    assert np.array_equal(naive_out, grid_out)
    rebuilt = build_grid(grid_out, params)
    assert {c: sorted(v) for c, v in new_grid.cells.items()} == {
        c: sorted(v) for c, v in rebuilt.cells.items()
    }


def test_iteration_paths_agree_on_random_instances():
    rng = np.random.default_rng(77)
    done = 0
    while done < 30:
        params = ModelParams(dim=2, radius=0.05, intensity=0.3)
        pts, grid = initialize(params, RandomStream(int(rng.integers(1 << 30))))
        if not grid_bad_pairs(grid, pts, params.radius):
            continue
        seed = int(rng.integers(1 << 30))
        a = prs_iteration_naive(pts, params, RandomStream(seed))
        b, _ = prs_iteration_grid(pts, grid, params, RandomStream(seed))
        assert np.array_equal(a, b)
        done += 1


def test_iteration_grid_leaves_far_cells_untouched():
    params, points = _one_conflict_instance()
    grid = build_grid(points, params)
    before = {c: list(v) for c, v in grid.cells.items()}
    conflict_cells = {grid.cell_of(points[2]), grid.cell_of(points[3])}
    _, new_grid = prs_iteration_grid(points, grid, params, RandomStream(4))
    reach = grid.resample_reach
    for cell, members in before.items():
        near = any(
            max(abs(a - b) for a, b in zip(cell, bc)) <= reach for bc in conflict_cells
        )
        if not near:
            # spectators keep their rows: indices shift only below removals
            assert cell in new_grid.cells


def test_composed_public_iterations_reproduce_full_run():
    # stepping the (points, grid) wrapper to termination equals prs_sample
    for seed in range(5):
        params = ModelParams(dim=2, radius=0.06, intensity=0.3)
        ref = prs_sample(params, RandomStream(seed), method="grid")
        rng = RandomStream(seed)
        pts, grid = initialize(params, rng)
        steps = 0
        while grid_bad_pairs(grid, pts, params.radius):
            pts, grid = prs_iteration_grid(pts, grid, params, rng)
            steps += 1
        assert np.array_equal(ref.points, pts)
        assert steps == ref.stats.iterations


def test_empirical_contraction_is_below_the_analytic_factor():
    # aggregate sum Z_{t+1} / sum Z_t over many runs stays under the bound
    params = ModelParams(dim=2, radius=0.02, intensity=0.15)
    num = den = 0
    for k in range(200):
        z = prs_sample(params, derive_stream(1000, k)).stats.bad_pair_trace
        for t in range(len(z) - 1):
            den += z[t]
            num += z[t + 1]
    bound = 2 * 0.15**2 * (8 + 6 * math.sqrt(3) / math.pi)
    assert den > 0
    assert num / den <= bound + 0.05


def test_iteration_count_tail_decays_geometrically():
    # P(T > t) should be dominated by an exponential envelope in the tail
    params = ModelParams(dim=2, radius=0.02, intensity=0.15)
    ts = np.array(
        [prs_sample(params, derive_stream(31337, k)).stats.iterations for k in range(400)]
    )
    tmax = ts.max()
    surv = np.array([(ts > t).mean() for t in range(tmax + 1)])
    for t in range(2, tmax):
        if surv[t] >= 0.04 and surv[t + 1] > 0:
            assert surv[t + 1] / surv[t] < 0.7
