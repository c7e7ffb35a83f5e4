"""Averages of characteristic curves under assumed OAT distributions.

The hourly average under a uniform OAT distribution on ``[a, b]`` is the
integral of the curve's piecewise-linear interpolant over ``[a, b]`` divided
by ``b - a``.  The daily total sums 24 hourly averages, either all over the
same pooled interval or over one interval per hour of the day.

All of these are linear functionals of the curve values, so they are computed
through weight vectors that also apply to stacks of bootstrap curves.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .datamodel import CharacteristicCurve, ControllerDataset
from .errors import EmptyInterval

HOURS = 24


@dataclass(frozen=True)
class OatDistribution:
    """Uniform OAT distribution(s): one pooled interval, or 24 hourly ones."""

    mode: Literal["pooled-uniform", "hourly-uniform"]
    support: tuple[float, float]
    hourly: Optional[tuple[tuple[float, float], ...]] = None

    def intervals(self) -> list[tuple[float, float]]:
        if self.mode == "pooled-uniform":
            return [self.support] * HOURS
        return list(self.hourly)


def pooled_distribution(support) -> OatDistribution:
    return OatDistribution("pooled-uniform", (float(support[0]), float(support[1])))


def hourly_distribution(datasets: Sequence[ControllerDataset], support) -> OatDistribution:
    """Per-hour intervals from each local hour's OAT range, clipped to ``support``.

    Raises :class:`EmptyInterval` naming the hour when an hour has no
    observations in some dataset or its clipped range is empty.
    """
    lo_s, hi_s = float(support[0]), float(support[1])
    intervals = []
    for hour in range(HOURS):
        lows, highs = [], []
        for d in datasets:
            sel = d.oat[d.local_hours == hour]
            if sel.size == 0:
                raise EmptyInterval(lo_s, hi_s, hour=hour)
            lows.append(sel.min())
            highs.append(sel.max())
        a, b = max(min(lows), lo_s), min(max(highs), hi_s)
        if not a < b:
            raise EmptyInterval(a, b, hour=hour)
        intervals.append((float(a), float(b)))
    return OatDistribution("hourly-uniform", (lo_s, hi_s), tuple(intervals))


def make_distribution(mode, datasets, support) -> OatDistribution:
    if mode == "pooled-uniform":
        return pooled_distribution(support)
    if mode == "hourly-uniform":
        return hourly_distribution(datasets, support)
    raise ValueError(f"unknown OAT distribution mode {mode!r}")


def interval_weights(grid: np.ndarray, a: float, b: float) -> np.ndarray:
    """Weights ``w`` with ``w @ v`` = integral over [a, b] of interp(grid, v)."""
    grid = np.asarray(grid, dtype=float)
    if not a < b:
        raise EmptyInterval(a, b)
    if a < grid[0] - 1e-9 * abs(grid[0]) or b > grid[-1] + 1e-9 * abs(grid[-1]):
        raise ValueError(f"[{a}, {b}] extends beyond curve support "
                         f"[{grid[0]}, {grid[-1]}]")
    a = max(a, grid[0])
    b = min(b, grid[-1])
    w = np.zeros(len(grid))
    # Knots: a, the interior grid points, b.  Each knot value is a linear
    # combination of at most two grid values.
    inner = np.flatnonzero((grid > a) & (grid < b))
    knots = np.concatenate(([a], grid[inner], [b]))

    def knot_coeffs(t):
        k = int(np.searchsorted(grid, t, side="right")) - 1
        k = min(max(k, 0), len(grid) - 2)
        g0, g1 = grid[k], grid[k + 1]
        frac = (t - g0) / (g1 - g0)
        return ((k, 1.0 - frac), (k + 1, frac))

    coeffs = [knot_coeffs(a)] + [((int(i), 1.0),) for i in inner] + [knot_coeffs(b)]
    for m in range(len(knots) - 1):
        half = 0.5 * (knots[m + 1] - knots[m])
        for idx, c in coeffs[m] + coeffs[m + 1]:
            w[idx] += half * c
    return w


def daily_weights(curve_grid: np.ndarray, dist: OatDistribution) -> np.ndarray:
    """Weights ``w`` with ``w @ values`` equal to the daily total."""
    total = np.zeros(len(curve_grid))
    if dist.mode == "pooled-uniform":
        a, b = dist.support
        return HOURS * interval_weights(curve_grid, a, b) / (b - a)
    for hour, (a, b) in enumerate(dist.intervals()):
        if not a < b:
            raise EmptyInterval(a, b, hour=hour)
        total += interval_weights(curve_grid, a, b) / (b - a)
    return total


def hourly_average(curve: CharacteristicCurve, a: float, b: float) -> float:
    """Mean of the curve under a uniform OAT distribution on [a, b]."""
    if not a < b:
        raise EmptyInterval(a, b)
    return float(interval_weights(curve.grid, a, b) @ curve.values / (b - a))


def daily_total(curve: CharacteristicCurve, dist: OatDistribution) -> float:
    """Sum over the 24 hours of the day of the hourly averages."""
    return float(daily_weights(curve.grid, dist) @ curve.values)
