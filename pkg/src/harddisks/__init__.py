"""Perfect sampling of the hard disks / hard spheres gas on the unit cube.

Configurations are Poisson point processes conditioned on every pairwise
distance being at least 2r, sampled exactly by resampling only the conflict
regions.  The package bundles the sampling engine (naive and grid-accelerated
paths), the analytic constants of the fast-termination regime, and a
statistical validation and benchmarking harness with a CLI front end.
"""

from .bounds import (
    BoundsReport,
    bounds_report,
    contraction_factor,
    correction_coefficient,
    jjp_constant,
    lambda_bar,
    lens_area,
    packing_density_lower_bound,
)
from .engine import (
    DEFAULT_MAX_ITERATIONS,
    IterationCapExceeded,
    RunOutcome,
    RunStats,
    initialize,
    prs_iteration_grid,
    prs_iteration_naive,
    prs_sample,
)
from .geometry import bad_pairs, bad_points, squared_distance, within_resampling_set
from .grid import Grid, build_grid, candidate_cells, grid_bad_pairs, neighbor_cells
from .model import ModelParams, unit_ball_volume
from .rng import RandomStream, derive_stream, poisson_variate, sample_poisson_in_box
from .validation import classical_rejection, estimate_density, nearest_neighbor_distances

__all__ = [
    "BoundsReport",
    "DEFAULT_MAX_ITERATIONS",
    "Grid",
    "IterationCapExceeded",
    "ModelParams",
    "RandomStream",
    "RunOutcome",
    "RunStats",
    "bad_pairs",
    "bad_points",
    "bounds_report",
    "build_grid",
    "candidate_cells",
    "classical_rejection",
    "contraction_factor",
    "correction_coefficient",
    "derive_stream",
    "estimate_density",
    "grid_bad_pairs",
    "initialize",
    "jjp_constant",
    "lambda_bar",
    "lens_area",
    "nearest_neighbor_distances",
    "neighbor_cells",
    "packing_density_lower_bound",
    "poisson_variate",
    "prs_iteration_grid",
    "prs_iteration_naive",
    "prs_sample",
    "sample_poisson_in_box",
    "squared_distance",
    "unit_ball_volume",
    "within_resampling_set",
]
