"""Model parameters for the hard disks / hard spheres gas on the unit cube.

The model is a Poisson point process on [0,1]^d conditioned on every pair of
points being at least 2r apart (open exclusion: distance exactly 2r is legal).
The intensity is normalised so that a ball of radius r contains ``intensity``
points in expectation, which keeps the asymptotics sensible as r -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MAX_DIM = 8


def unit_ball_volume(dim: int | float) -> float:
    """Volume of the unit ball in ``dim`` dimensions, pi^(d/2) / Gamma(d/2 + 1)."""
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {dim}")
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


@dataclass(frozen=True)
class ModelParams:
    """Dimension, disk radius and normalised intensity of the model.

    ``intensity`` is the expected number of Poisson points inside a ball of
    radius ``radius``; the raw rate of the underlying process is the derived
    ``poisson_intensity`` = intensity / (v_d * r^d), never stored.
    """

    dim: int
    radius: float
    intensity: float

    def __post_init__(self):
        if not isinstance(self.dim, int) or not 1 <= self.dim <= MAX_DIM:
            raise ValueError(f"dim must be an integer in [1, {MAX_DIM}], got {self.dim!r}")
        if not (math.isfinite(self.radius) and 0.0 < self.radius < 0.5):
            raise ValueError(f"radius must satisfy 0 < r < 1/2, got {self.radius!r}")
        if not (math.isfinite(self.intensity) and self.intensity >= 0.0):
            raise ValueError(f"intensity must be a finite value >= 0, got {self.intensity!r}")

    @property
    def poisson_intensity(self) -> float:
        """Rate of the underlying Poisson process, intensity / (v_d * r^d)."""
        return self.intensity / (unit_ball_volume(self.dim) * self.radius**self.dim)

    @property
    def pair_threshold(self) -> float:
        """Squared exclusion distance (2r)^2; pairs strictly below it conflict."""
        return (2.0 * self.radius) ** 2
