"""Closed-form constants governing the fast-termination regime.

The resampling loop contracts the expected conflict count by a constant
factor per iteration once the normalised intensity is small enough.  This
module evaluates that factor and every related constant:

* the crude intensity threshold 2^-(d + 1/2) in any dimension, and the
  refined two-dimensional threshold obtained by removing the double counting
  of conflicts whose points fall in the same exclusion ball;
* the lens area L(rho) = 2*arccos(rho/2) - (rho/2)*sqrt(4 - rho^2) of two
  unit disks at center offset rho, which drives that correction;
* the constant c_d linking intensity to a packing-density guarantee
  alpha >= c_d * lambda, obtained as the fixed point of
  exp(-z) = sqrt(2) * exp(-sqrt(2) * (3/4)^(d/2)) * z.

All values are computed at full double precision from the closed forms.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .model import MAX_DIM, unit_ball_volume


def lens_area(rho: float) -> float:
    """Intersection area of two unit disks whose centers are ``rho`` apart.

    Monotone decreasing on [0, 2], from pi (coincident) to 0 (tangent).
    """
    if not 0.0 <= rho <= 2.0:
        raise ValueError(f"center offset must lie in [0, 2], got {rho!r}")
    return 2.0 * math.acos(rho / 2.0) - 0.5 * rho * math.sqrt(4.0 - rho * rho)


def lens_moment_bracket(rho: float) -> float:
    """Antiderivative of rho * L(rho), evaluated at ``rho`` (zero at 0).

    Closed form: pi/2 + (rho^2 - 1) arccos(rho/2) - (rho/4 + rho^3/8) sqrt(4 - rho^2).
    """
    if not 0.0 <= rho <= 2.0:
        raise ValueError(f"center offset must lie in [0, 2], got {rho!r}")
    return (
        math.pi / 2.0
        + (rho * rho - 1.0) * math.acos(rho / 2.0)
        - (rho / 4.0 + rho**3 / 8.0) * math.sqrt(4.0 - rho * rho)
    )


def correction_coefficient() -> float:
    """Same-ball double-counting correction per squared intensity: 8 - 6*sqrt(3)/pi."""
    return 8.0 - 6.0 * math.sqrt(3.0) / math.pi


def contraction_factor(lam: float, dim: int, crude: bool = False) -> float:
    """Expected conflict multiplier per iteration at intensity ``lam``.

    Dimension 2 uses the lens-corrected bound 2*lam^2*(8 + 6*sqrt(3)/pi);
    every other dimension uses 2^(2d+1)*lam^2.  ``crude=True`` gives the
    uncorrected 32*lam^2 in dimension 2 for comparison.
    """
    if lam < 0.0:
        raise ValueError(f"intensity must be >= 0, got {lam!r}")
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {dim}")
    if dim == 2 and not crude:
        return 2.0 * lam * lam * (8.0 + 6.0 * math.sqrt(3.0) / math.pi)
    return 2.0 ** (2 * dim + 1) * lam * lam


def lambda_bar(dim: int, improved: bool = False) -> float:
    """Proven intensity threshold for fast termination.

    Crude: 2^-(d + 1/2).  Improved (dimension 2 only): the root of
    lam^2 * (16 + 12*sqrt(3)/pi) = 1.
    """
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {dim}")
    if improved:
        if dim != 2:
            raise ValueError("the improved threshold is only derived for dimension 2")
        return (16.0 + 12.0 * math.sqrt(3.0) / math.pi) ** -0.5
    return 2.0 ** -(dim + 0.5)


def jjp_constant(dim: int | float) -> float:
    """The packing constant c_d: fixed point of exp(-z) = a*z with
    a = sqrt(2) * exp(-sqrt(2) * (3/4)^(d/2)).

    Monotone increasing in d; ``dim=math.inf`` gives the limit (a = sqrt(2)).
    Solved by bisection on [0, 5] to 1e-10.
    """
    if dim != math.inf and dim < 1:
        raise ValueError(f"dimension must be >= 1 or inf, got {dim!r}")
    if dim == math.inf:
        a = math.sqrt(2.0)
    else:
        a = math.sqrt(2.0) * math.exp(-math.sqrt(2.0) * (3.0 / 4.0) ** (dim / 2.0))
    lo, hi = 0.0, 5.0
    # exp(-z) - a*z is positive at 0 and negative at 5 for every admissible a.
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if math.exp(-mid) - a * mid > 0.0:
            lo = mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    return math.exp(-z)


def packing_density_lower_bound(lam: float, dim: int) -> float:
    """Guaranteed expected packing density c_d * lam.

    The derivation assumes lam <= the crude threshold; above it the value is
    still returned (callers may warn) but carries no guarantee.
    """
    if lam < 0.0:
        raise ValueError(f"intensity must be >= 0, got {lam!r}")
    return jjp_constant(dim) * lam


@dataclass
class BoundsReport:
    """Every analytic constant for one (dimension, intensity) query.

    ``lambda_bar_improved`` is present only in dimension 2; the
    intensity-dependent fields are None when no intensity was supplied.
    """

    dim: int
    intensity: float | None
    unit_ball_volume: float
    lambda_bar_crude: float
    lambda_bar_improved: float | None
    correction_coefficient: float
    jjp_constant: float
    contraction: float | None = None
    contraction_crude: float | None = None
    packing_density_lower_bound: float | None = None
    subcritical: bool | None = None

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(asdict(self), indent=indent)


def bounds_report(dim: int, lam: float | None = None) -> BoundsReport:
    """Assemble the full constants report for a dimension and optional intensity."""
    report = BoundsReport(
        dim=dim,
        intensity=lam,
        unit_ball_volume=unit_ball_volume(dim),
        lambda_bar_crude=lambda_bar(dim),
        lambda_bar_improved=lambda_bar(2, improved=True) if dim == 2 else None,
        correction_coefficient=correction_coefficient(),
        jjp_constant=jjp_constant(dim),
    )
    if lam is not None:
        report.contraction = contraction_factor(lam, dim)
        if dim == 2:
            report.contraction_crude = contraction_factor(lam, dim, crude=True)
        report.packing_density_lower_bound = packing_density_lower_bound(lam, dim)
        best = report.lambda_bar_improved if dim == 2 else report.lambda_bar_crude
        report.subcritical = lam < best
    return report
