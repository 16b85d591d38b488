import math

import pytest

from harddisks.model import ModelParams, unit_ball_volume


def test_poisson_intensity_normalisation():
    # a ball of radius r holds `intensity` points in expectation
    params = ModelParams(dim=2, radius=1 / 200, intensity=0.5)
    assert params.poisson_intensity == pytest.approx(0.5 * 200**2 / math.pi, rel=1e-12)
    p1 = ModelParams(dim=1, radius=0.05, intensity=0.2)
    assert p1.poisson_intensity == pytest.approx(0.2 / (2 * 0.05), rel=1e-12)
    p3 = ModelParams(dim=3, radius=0.1, intensity=0.3)
    assert p3.poisson_intensity == pytest.approx(0.3 / (4 * math.pi / 3 * 1e-3), rel=1e-12)


def test_pair_threshold():
    params = ModelParams(dim=2, radius=0.125, intensity=0.1)
    assert params.pair_threshold == 0.0625


def test_parameter_validation():
    with pytest.raises(ValueError):
        ModelParams(dim=9, radius=0.1, intensity=0.1)
    with pytest.raises(ValueError):
        ModelParams(dim=2, radius=0.5, intensity=0.1)
    with pytest.raises(ValueError):
        ModelParams(dim=2, radius=0.0, intensity=0.1)
    with pytest.raises(ValueError):
        ModelParams(dim=2, radius=0.1, intensity=float("inf"))
    # zero intensity is legal (empty process)
    ModelParams(dim=2, radius=0.1, intensity=0.0)


def test_unit_ball_volume_range():
    with pytest.raises(ValueError):
        unit_ball_volume(0)
    assert unit_ball_volume(8) == pytest.approx(math.pi**4 / 24.0, rel=1e-12)
