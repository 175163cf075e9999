"""Seeded construction of hard benchmark instances and the heavy-extremes family.

The benchmark generator builds a bimodal weight histogram: two peak locations
are drawn around n/3 and 2n/3, then 5000 normal samples per peak are rounded
to item indices and tallied.  Costs are uniform on [1, 6], the capacity is a
uniform fraction of the total weight, and the compactness parameter is drawn
from {1, 2, 3, 4}.  Instances of this shape combine a tight capacity with
smooth weight profiles, which is what makes their relaxations heavily
fractional and their exact solution slow.

Determinism: every draw category (peaks, histograms, costs, capacity
proportion, delta) owns a dedicated Philox-4x64-10 counter-based stream keyed
by (seed, category), so adding draws to one category never perturbs the
others.  Normal variates are produced by inverse-CDF transform
(scipy.special.ndtri) applied to stream uniforms.  Streams are deterministic
per implementation; bit-identical reproduction across languages is not a
goal.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy.special import ndtri

from .core import Instance

__all__ = ["GenParams", "generate_instance", "build_ce", "GENERATOR_NAME"]

GENERATOR_NAME = "two-peak-histogram-v1"

_SAMPLES_PER_PEAK = 5000
_SPREAD_CHOICES = (8, 16, 32)
_COST_LO, _COST_HI = 1.0, 6.0
_PROP_LO, _PROP_HI = 0.65, 0.95
_DELTA_CHOICES = (1, 2, 3, 4)


class _Stream(IntEnum):
    PEAKS = 0
    HISTOGRAM = 1
    COSTS = 2
    PROPORTION = 3
    DELTA = 4


def _rng(seed: int, stream: _Stream) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _normal(rng: np.random.Generator, mu: float, sigma: float, size: int | None = None):
    u = rng.random(size)
    u = np.maximum(u, np.nextafter(0.0, 1.0))  # ndtri(0) = -inf
    return mu + sigma * ndtri(u)


@dataclass(frozen=True)
class GenParams:
    """Parameters realized by one generator run, recorded in instance meta."""

    n: int
    seed: int
    k: int
    p: float
    delta: int
    peak1: float
    peak2: float

    def __post_init__(self) -> None:
        if self.k not in _SPREAD_CHOICES:
            raise ValueError(f"k must be in {_SPREAD_CHOICES}, got {self.k}")
        if not _PROP_LO <= self.p <= _PROP_HI:
            raise ValueError(f"p must lie in [{_PROP_LO}, {_PROP_HI}], got {self.p}")
        if self.delta not in _DELTA_CHOICES:
            raise ValueError(f"delta must be in {_DELTA_CHOICES}, got {self.delta}")
        for peak in (self.peak1, self.peak2):
            if not 1 <= peak <= self.n:
                raise ValueError(f"peak location {peak} outside [1, {self.n}]")


def _draw_peak(rng: np.random.Generator, mu: float, sigma: float, n: int) -> float:
    # resample until inside the index range; out-of-range draws are rare
    for _ in range(100_000):
        x = float(_normal(rng, mu, sigma))
        if 1.0 <= x <= n:
            return x
    raise RuntimeError("peak resampling did not land inside [1, n]")


def _peak_histogram(rng: np.random.Generator, peak: float, sigma: float, n: int) -> np.ndarray:
    samples = _normal(rng, peak, sigma, _SAMPLES_PER_PEAK)
    idx = np.rint(samples).astype(np.int64)
    idx = idx[(idx >= 1) & (idx <= n)]  # out-of-range samples are discarded, not redrawn
    return np.bincount(idx, minlength=n + 1)[1:]


def generate_instance(n: int, seed: int) -> Instance:
    """Generate one benchmark instance; the same (n, seed) always yields the same bytes.

    Weights are kept as raw histogram counts.  The L1 normalization constant
    (the total weight) is recorded under ``meta["scale"]`` so that the unit
    normalized form can be recovered by dividing weights and capacity by it.
    """
    if n < 4:
        raise ValueError(f"generator needs n >= 4, got {n}")

    rng_peaks = _rng(seed, _Stream.PEAKS)
    peak1 = _draw_peak(rng_peaks, n / 3.0, n / 6.0, n)
    peak2 = _draw_peak(rng_peaks, 2.0 * n / 3.0, n / 6.0, n)

    rng_hist = _rng(seed, _Stream.HISTOGRAM)
    k = int(_SPREAD_CHOICES[rng_hist.integers(0, len(_SPREAD_CHOICES))])
    sigma = n / (2.0 * k)
    counts = _peak_histogram(rng_hist, peak1, sigma, n) + _peak_histogram(rng_hist, peak2, sigma, n)

    costs = _rng(seed, _Stream.COSTS).uniform(_COST_LO, _COST_HI, n)
    p = float(_rng(seed, _Stream.PROPORTION).uniform(_PROP_LO, _PROP_HI))
    delta = int(_rng(seed, _Stream.DELTA).integers(1, len(_DELTA_CHOICES) + 1))

    total = int(counts.sum())
    params = GenParams(n=n, seed=seed, k=k, p=p, delta=delta, peak1=peak1, peak2=peak2)
    meta = {
        "seed": seed,
        "generator": GENERATOR_NAME,
        "scale": float(total),
        "params": {
            "k": params.k,
            "p": params.p,
            "delta": params.delta,
            "peak1": params.peak1,
            "peak2": params.peak2,
        },
    }
    return Instance(
        n=n,
        weights=tuple(int(w) for w in counts),
        costs=tuple(float(c) for c in costs),
        capacity_q=p * total,
        delta=delta,
        meta=meta,
    )


def build_ce(m: int) -> Instance:
    """The heavy-extremes family: 2m unit-cost items, oversized end weights.

    Weights are (2m+1, 1, ..., 1, 2m+1), the capacity is 4m+2 and delta is 2,
    so the two extreme items are forced into any feasible selection and meet
    the capacity exactly on their own; the compactness constraints then
    require roughly every other intermediate item.  The linear and quadratic
    forms of the compactness inequality behave differently on this family,
    which makes it the standard stress test for the relaxations.
    """
    if m < 2:
        raise ValueError(f"family is defined for m >= 2, got {m}")
    n = 2 * m
    heavy = 2 * m + 1
    weights = (heavy,) + (1,) * (n - 2) + (heavy,)
    return Instance(
        n=n,
        weights=weights,
        costs=(1.0,) * n,
        capacity_q=float(4 * m + 2),
        delta=2,
        meta={"generator": "heavy-extremes", "m": m},
    )
