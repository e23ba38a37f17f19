"""Temperedness diagnostics for scalar orbit series.

A series phi(f^n x) >= 1 is eps-tempered when its e^(-eps n)-discounted
supremum is finite, and tempered when that holds for every eps > 0, which on
finite data is read off from the growth-rate estimate (1/n) log phi(f^n x).
An at-most-exponential bound phi(f^n x) <= M^n phi(x) combined with bounded
return times drives that rate to zero, so the M-bound check plus the rate
estimate realizes the exponential-growth-implies-tempered criterion.

These are finite-sample estimates, not certifications: the asymptotic
statements hold almost everywhere over an invariant measure, which no finite
orbit can witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "OrbitSeries",
    "TemperVerdict",
    "MBoundError",
    "c_epsilon",
    "temper_rate",
    "exp_growth_check",
    "shift",
    "bounded_return_series",
]

TEMPER_TOL = 0.02


class MBoundError(ValueError):
    """The data violates the claimed per-step exponential bound."""


@dataclass(frozen=True, init=False)
class OrbitSeries:
    """Scalar values phi(f^n x) >= 1 for n = 0..N."""

    values: np.ndarray

    def __init__(self, values):
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("an orbit series is a nonempty 1-d array")
        if np.any(vals < 1.0):
            raise ValueError("orbit series values must be >= 1")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size


class TemperVerdict(NamedTuple):
    rate: float
    tempered: bool
    tolerance: float


def c_epsilon(series: OrbitSeries, eps: float) -> float:
    """sup over stored n of e^(-eps n) * phi(f^n x)."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    n = np.arange(len(series))
    return float(np.max(np.exp(-eps * n) * series.values))


def temper_rate(
    series: OrbitSeries,
    *,
    tol: float = TEMPER_TOL,
    top_fraction: float = 0.25,
) -> TemperVerdict:
    """Estimate limsup (1/n) log phi(f^n x) from the top quartile of indices.

    Early indices dominate (1/n) log through transients, so the estimate is
    the max of (1/n) log values[n] over the last ``top_fraction`` of the
    series; the verdict is tempered when the estimate is below ``tol``.
    """
    n = len(series)
    if n < 10:
        raise ValueError("need at least 10 samples to estimate a rate")
    start = max(1, int(np.floor((1.0 - top_fraction) * (n - 1))))
    idx = np.arange(start, n)
    rate = float(np.max(np.log(series.values[idx]) / idx))
    return TemperVerdict(rate=rate, tempered=rate <= tol, tolerance=tol)


def exp_growth_check(
    series: OrbitSeries,
    m: float,
    *,
    tol: float = TEMPER_TOL,
) -> TemperVerdict:
    """Verify phi(f^k x) <= M^(k-j) phi(f^j x) for all j < k, then rate it.

    Equivalent to log(values[k]) - k log M never exceeding its running
    minimum.  Violations raise MBoundError since the data then fails the
    hypothesis; otherwise the temper-rate verdict is returned.
    """
    if m < 1.0:
        raise ValueError("the growth bound M must be >= 1")
    psi = np.log(series.values) - np.arange(len(series)) * np.log(m)
    running = np.minimum.accumulate(psi)
    bad = psi[1:] > running[:-1] + 1e-12
    if np.any(bad):
        k = int(np.argmax(bad)) + 1
        raise MBoundError(f"values[{k}] exceeds the M-bound relative to an earlier index")
    return temper_rate(series, tol=tol)


def shift(series: OrbitSeries, k: int = 1) -> OrbitSeries:
    """The series along the orbit of f^k x."""
    if not 0 <= k < len(series):
        raise ValueError("shift must leave a nonempty series")
    return OrbitSeries(series.values[k:])


def bounded_return_series(
    m: float,
    n: int,
    *,
    max_gap: int = 50,
    seed: int = 0,
) -> OrbitSeries:
    """Synthetic orbit with M-bounded growth and bounded return times.

    Between returns to the base value 1 the series rises by a factor M per
    step for at most half the gap and then falls back, so the M-bound holds
    by construction while excursions stay shorter than ``max_gap``.
    """
    if m < 1.0:
        raise ValueError("the growth bound M must be >= 1")
    rng = np.random.default_rng(seed)
    vals = [1.0]
    while len(vals) < n:
        gap = int(rng.integers(2, max_gap + 1))
        rise = max(1, gap // 2)
        for t in range(1, rise + 1):
            vals.append(float(m) ** t)
        for t in range(rise - 1, 0, -1):
            vals.append(float(m) ** t)
        vals.append(1.0)
    return OrbitSeries(np.array(vals[:n]))
