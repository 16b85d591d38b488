"""Seedable randomness: uniform streams, Poisson variates, box sampling.

Reproducibility contract
------------------------
A RandomStream wraps numpy's PCG64 bit generator (fixed for the life of this
repository; it passes TestU01 BigCrush and PractRand).  The same 64-bit seed
always yields the same bit-exact sequence of doubles, and a batch request
``stream.uniforms(n)`` consumes exactly the same draws as n scalar requests.

Poisson draw accounting, needed to replay runs:

* mean < 10: CDF inversion by sequential search; consumes exactly ONE uniform
  per variate, including mean = 0 (which always returns 0).
* mean >= 10: transformed rejection with squeeze (Hormann's PTRS); consumes
  two uniforms per acceptance attempt, so the draw count is variable but a
  deterministic function of the stream state.
* ``poisson_counts`` (the vectorised per-cell path used by the sampling
  engine) uses table inversion at any mean: one uniform per count, bit-equal
  to the scalar inversion search.  The table truncates where the CDF stops
  increasing in double precision, which misplaces tail mass of order 1e-16.

Box sampling consumes one Poisson variate for the count, then count * dim
uniforms for the coordinates, point-major and axis-minor (point 0 axis 0,
point 0 axis 1, ..., point 1 axis 0, ...).
"""

from __future__ import annotations

import math

import numpy as np

# Above this mean the scalar variate switches from inversion to rejection.
_INVERSION_CUTOFF = 10.0


class RandomStream:
    """Single-owner deterministic random stream.

    Not safe for concurrent use; spawn one stream per worker with
    derive_stream instead of sharing.
    """

    def __init__(self, seed, _bit_generator=None):
        self.seed = seed
        if _bit_generator is None:
            _bit_generator = np.random.PCG64(seed)
        self._gen = np.random.Generator(_bit_generator)

    def random(self) -> float:
        """One double in [0, 1)."""
        return float(self._gen.random())

    def uniforms(self, shape) -> np.ndarray:
        """Array of doubles in [0, 1); consumes prod(shape) sequential draws."""
        return self._gen.random(shape)

    def __repr__(self):
        return f"RandomStream(seed={self.seed!r})"


def derive_stream(base_seed: int, index: int) -> RandomStream:
    """Independent substream for replicate ``index`` of a run seeded ``base_seed``.

    Uses SeedSequence((base_seed, index)), so any replicate of any experiment
    can be replayed in isolation from the pair of integers alone.
    """
    seq = np.random.SeedSequence((base_seed, index))
    stream = RandomStream((base_seed, index), _bit_generator=np.random.PCG64(seq))
    return stream


def poisson_cdf_table(mean: float) -> np.ndarray:
    """Partial-sum table F_k = P(N <= k) accumulated exactly like the scalar search.

    The table ends at the first k where adding the next pmf term no longer
    changes the partial sum in double precision.
    """
    if not (math.isfinite(mean) and mean >= 0.0):
        raise ValueError(f"mean must be finite and >= 0, got {mean!r}")
    p = math.exp(-mean)
    cum = p
    table = [cum]
    k = 0
    while True:
        k += 1
        p *= mean / k
        nxt = cum + p
        if nxt == cum:
            break
        cum = nxt
        table.append(cum)
    return np.asarray(table, dtype=np.float64)


def _poisson_inversion(u: float, mean: float) -> int:
    # Sequential search: smallest k with u <= CDF(k), CDF accumulated in order.
    k = 0
    p = math.exp(-mean)
    cum = p
    while u > cum:
        k += 1
        p *= mean / k
        nxt = cum + p
        if nxt == cum:  # tail saturated in double precision
            return k
        cum = nxt
    return k


def _poisson_ptrs(rng: RandomStream, mean: float) -> int:
    # Transformed rejection with squeeze (Hormann 1993), valid for mean >= 10.
    b = 0.931 + 2.53 * math.sqrt(mean)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    log_mean = math.log(mean)
    while True:
        u = rng.random() - 0.5
        v = rng.random()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mean + 0.43)
        if us >= 0.07 and v <= v_r:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b)) <= (
            k * log_mean - mean - math.lgamma(k + 1.0)
        ):
            return int(k)


def poisson_variate(rng: RandomStream, mean: float) -> int:
    """One Poisson(mean) variate with the documented draw accounting."""
    if not (math.isfinite(mean) and mean >= 0.0):
        raise ValueError(f"mean must be finite and >= 0, got {mean!r}")
    if mean < _INVERSION_CUTOFF:
        return _poisson_inversion(rng.random(), mean)
    return _poisson_ptrs(rng, mean)


def poisson_counts(rng: RandomStream, mean: float, k: int, table: np.ndarray | None = None) -> np.ndarray:
    """k iid Poisson(mean) counts, one uniform each, via table inversion.

    Bit-identical to k scalar inversion searches for any mean.  A uniform
    beyond the saturated table maps to len(table), matching the scalar search.
    """
    if table is None:
        table = poisson_cdf_table(mean)
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    u = rng.uniforms(k)
    return np.searchsorted(table, u, side="left").astype(np.int64)


def sample_poisson_in_box(rng: RandomStream, intensity: float, low, high) -> np.ndarray:
    """Homogeneous Poisson sample on an axis-aligned box inside [0, 1]^d.

    Count ~ Poisson(intensity * volume), then count points uniform in the box,
    point-major axis-minor.  Returns an (n, d) array.
    """
    lo = np.asarray(low, dtype=np.float64).ravel()
    hi = np.asarray(high, dtype=np.float64).ravel()
    if lo.shape != hi.shape:
        raise ValueError("low/high dimension mismatch")
    extent = hi - lo
    if np.any(extent <= 0.0):
        raise ValueError(f"degenerate box: low={lo}, high={hi}")
    if intensity < 0.0 or not math.isfinite(intensity):
        raise ValueError(f"intensity must be finite and >= 0, got {intensity!r}")
    volume = float(np.prod(extent))
    n = poisson_variate(rng, intensity * volume)
    u = rng.uniforms((n, lo.shape[0]))
    return lo + extent * u
