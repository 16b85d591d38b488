import math

import numpy as np
import pytest

from harddisks.engine import IterationCapExceeded, prs_sample
from harddisks.experiments import (
    collect_comparison,
    iteration_scaling_experiment,
    oracle_equivalence_test,
    runtime_scaling_experiment,
    supercritical_probe,
)
from harddisks.geometry import bad_pairs, squared_distance_matrix
from harddisks.model import ModelParams
from harddisks.rng import RandomStream, derive_stream, sample_poisson_in_box
from harddisks.stats import Histogram, align_integer_histograms, chi_square_two_sample
from harddisks.validation import (
    classical_rejection,
    estimate_density,
    nearest_neighbor_distances,
)


def test_classical_rejection_easy_regime():
    params = ModelParams(dim=2, radius=0.1, intensity=0.001)
    out = classical_rejection(params, RandomStream(0))
    assert out.stats.iterations == 0  # first draw accepted
    assert bad_pairs(out.points, params.radius) == set()


def test_classical_rejection_always_conflict_free():
    params = ModelParams(dim=2, radius=0.25, intensity=0.3)
    for k in range(50):
        out = classical_rejection(params, derive_stream(3, k))
        assert bad_pairs(out.points, params.radius) == set()
        assert out.stats.bad_pair_trace[-1] == 0
        assert all(z > 0 for z in out.stats.bad_pair_trace[:-1])


def test_classical_rejection_attempts_match_acceptance_probability():
    params = ModelParams(dim=2, radius=0.25, intensity=0.3)
    rate = params.poisson_intensity
    # independent acceptance-probability estimate from raw draws
    rng = RandomStream(1001)
    accepts = 0
    n_draws = 20_000
    for _ in range(n_draws):
        pts = sample_poisson_in_box(rng, rate, [0.0, 0.0], [1.0, 1.0])
        if not bad_pairs(pts, params.radius):
            accepts += 1
    p_hat = accepts / n_draws
    attempts = [
        classical_rejection(params, derive_stream(55, k)).stats.iterations + 1
        for k in range(3000)
    ]
    assert np.mean(attempts) == pytest.approx(1.0 / p_hat, rel=0.1)


def test_classical_rejection_cap():
    params = ModelParams(dim=2, radius=0.2, intensity=2.0)
    with pytest.raises(IterationCapExceeded) as info:
        classical_rejection(params, RandomStream(2), max_attempts=3)
    assert len(info.value.stats.bad_pair_trace) == 3


def test_estimate_density_trivial_cases():
    params = ModelParams(dim=2, radius=0.05, intensity=0.1)
    assert estimate_density(np.zeros((0, 2)), params) == 0.0
    params3 = ModelParams(dim=3, radius=0.1, intensity=0.1)
    one = estimate_density(np.array([[0.5, 0.5, 0.5]]), params3)
    assert one == pytest.approx(4.0 * math.pi / 3.0 * 1e-3, rel=1e-12)


def test_estimate_density_reference_count():
    # 2406 disks of radius 1/200 occupy about 18.9% of the square
    params = ModelParams(dim=2, radius=1 / 200, intensity=0.5)
    side = int(math.ceil(math.sqrt(2406)))
    xs = (np.arange(side) + 0.5) / side
    pts = np.array([[x, y] for x in xs for y in xs])[:2406]
    assert estimate_density(pts, params) == pytest.approx(0.189, abs=1e-3)


def test_estimate_density_rejects_conflicts():
    params = ModelParams(dim=2, radius=0.05, intensity=0.1)
    with pytest.raises(ValueError):
        estimate_density(np.array([[0.5, 0.5], [0.5, 0.51]]), params)


def test_nearest_neighbor_distances_small_sets():
    params = ModelParams(dim=2, radius=0.05, intensity=0.1)
    assert nearest_neighbor_distances(np.zeros((0, 2)), params).shape == (0,)
    assert nearest_neighbor_distances(np.array([[0.5, 0.5]]), params).shape == (0,)
    pts = np.array([[0.1, 0.1], [0.4, 0.1], [0.4, 0.5]])
    nn = nearest_neighbor_distances(pts, params)
    assert nn == pytest.approx([0.3, 0.3, 0.4])


def test_nearest_neighbor_grid_path_matches_brute_force():
    rng = np.random.default_rng(12)
    pts = rng.random((300, 2))  # forces the cell-structure path
    params = ModelParams(dim=2, radius=0.03, intensity=0.1)
    nn = nearest_neighbor_distances(pts, params)
    d2 = squared_distance_matrix(pts, pts)
    np.fill_diagonal(d2, np.inf)
    assert np.allclose(nn, np.sqrt(d2.min(axis=1)), rtol=0, atol=0)


def test_oracle_equivalence_battery_passes():
    params = ModelParams(dim=2, radius=0.25, intensity=0.3)
    report = oracle_equivalence_test(params, n_samples=4000, seed_base=2025)
    assert report.tests["chi_square_counts"]["p_value"] > 0.001
    assert report.tests["ks_nearest_neighbor"]["p_value"] > 0.001


def test_oracle_equivalence_one_dimensional():
    params = ModelParams(dim=1, radius=0.2, intensity=0.2)
    report = oracle_equivalence_test(params, n_samples=3000, seed_base=77)
    assert report.tests["chi_square_counts"]["p_value"] > 0.001
    assert report.tests["ks_nearest_neighbor"]["p_value"] > 0.001


def _corrupted_counts(params, n_samples, seed_base):
    """Deliberately broken sampler: drops the fresh points of the first
    resampling pass, then finishes the run normally."""
    from harddisks.engine import _geom_for, _GridRun

    geom = _geom_for(params)
    counts = []
    for k in range(n_samples):
        rng = derive_stream(seed_base, k)
        run = _GridRun.start(geom, rng)
        first = True
        while run.pairs:
            before = len(run.pts)
            run.iterate(rng)
            if first:
                # discard everything the first pass added
                for pid in range(before, len(run.pts)):
                    run.cells[run.cell_of[pid]].remove(pid)
                    run.dead.add(pid)
                run.pairs = {
                    (i, j) for i, j in run.pairs if i < before and j < before
                }
                first = False
        counts.append(len(run.pts) - len(run.dead))
    return counts


def test_mutation_control_is_detected():
    # a corrupted sampler must fail the count test decisively
    params = ModelParams(dim=2, radius=0.25, intensity=0.3)
    good = [
        prs_sample(params, derive_stream(11, k)).stats.final_count
        for k in range(4000)
    ]
    bad = _corrupted_counts(params, 4000, seed_base=900)
    h1, h2 = align_integer_histograms(
        Histogram.of_integers(good), Histogram.of_integers(bad)
    )
    _, p = chi_square_two_sample(h1, h2)
    assert p < 1e-4


def test_iteration_scaling_experiment_shape():
    report = iteration_scaling_experiment(
        0.15, [1 / 16, 1 / 32], reps=10, seed_base=5, dim=2
    )
    assert len(report.cells) == 2
    means = report.derived["mean_iterations"]
    assert len(means) == 2
    assert len(report.derived["iteration_differences"]) == 1
    assert report.failures == 0
    with pytest.raises(ValueError):
        iteration_scaling_experiment(0.15, [1 / 16], reps=0, seed_base=5)


def test_iteration_scaling_tiny_intensity():
    report = iteration_scaling_experiment(
        0.001, [1 / 16, 1 / 32], reps=30, seed_base=6, dim=2
    )
    for cell in report.cells:
        assert cell.metrics["mean_iterations"] < 0.1


def test_runtime_scaling_experiment_reports_ratios():
    report = runtime_scaling_experiment(
        0.15, [1 / 32, 1 / 64], reps=5, seed_base=9, dim=2
    )
    ratios = report.derived["wall_time_ratios"]
    assert len(ratios) == 1 and ratios[0] > 0
    # resampled-point totals decay along the trace
    for cell in report.cells:
        head = cell.traces["mean_resampled_head"]
        if len(head) >= 3:
            assert head[2] < head[0]


def test_small_instances_are_trivially_fast():
    report = runtime_scaling_experiment(0.15, [0.25], reps=20, seed_base=14, dim=2)
    assert report.cells[0].metrics["median_wall_time"] < 0.01


def test_initial_conflicts_match_pair_counting_monte_carlo():
    # E Z0 = lambda_r^2 / 2 * area{(x, y) in the square^2 : |x-y| < 2r},
    # the area estimated by an independent pair Monte Carlo
    params = ModelParams(dim=2, radius=0.05, intensity=0.15)
    rng = np.random.default_rng(77)
    n_pairs = 2_000_000
    x = rng.random((n_pairs, 2))
    y = rng.random((n_pairs, 2))
    close = ((x - y) ** 2).sum(axis=1) < (2 * params.radius) ** 2
    area = close.mean()
    expected = params.poisson_intensity**2 / 2 * area
    z0 = [
        prs_sample(params, derive_stream(4500, k)).stats.bad_pair_trace[0]
        for k in range(600)
    ]
    assert abs(np.mean(z0) - expected) / expected < 0.05


def test_supercritical_probe_is_descriptive():
    report = supercritical_probe(
        [0.2, 3.0], radius=0.05, reps=5, seed_base=13, max_iterations=60
    )
    frac_sub = report.cells[0].metrics["cap_exceeded_fraction"]
    frac_super = report.cells[1].metrics["cap_exceeded_fraction"]
    assert frac_sub == 0.0
    assert frac_super == 1.0


def test_collect_comparison_replicates_are_replayable():
    params = ModelParams(dim=2, radius=0.25, intensity=0.3)
    a = collect_comparison(params, 50, seed_base=321)
    b = collect_comparison(params, 50, seed_base=321)
    assert a.counts_a == b.counts_a
    assert a.counts_b == b.counts_b
    assert np.array_equal(a.nn_a, b.nn_a)
