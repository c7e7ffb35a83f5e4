"""Hourly comfort-violation metric.

For hour i the metric is the zone-averaged amount (degF h) by which zone
temperatures leave their comfort band::

    C[i] = (1/Z) * sum_j (|T_j[i] - S_j[i]| - B_j[i])_+

Hourly mean temperatures stand in for the within-hour integral.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import ControllerDataset, HourlyRecord


def soft_threshold(x):
    """``(x)_+``: zero below zero, identity otherwise.  Works on arrays."""
    if np.ndim(x) == 0:
        return x if x > 0 else 0.0
    return np.maximum(x, 0.0)


def hourly_comfort(record: HourlyRecord, zone_count: int) -> float:
    total = 0.0
    for z in record.zones:
        total += soft_threshold(abs(z.temp - z.setpoint) - z.band)
    return total / zone_count


def comfort_values(temp, setpoint, band) -> np.ndarray:
    """Vectorised metric for (N, Z) arrays of zone temperature, set point, band."""
    excess = np.abs(np.asarray(temp, float) - np.asarray(setpoint, float)) - np.asarray(band, float)
    excess = soft_threshold(np.atleast_2d(excess))
    # Accumulate zone by zone so the result is bit-identical to hourly_comfort.
    total = np.zeros(excess.shape[0])
    for j in range(excess.shape[1]):
        total += excess[:, j]
    return total / excess.shape[1]


@dataclass(frozen=True)
class ComfortSeries:
    values: np.ndarray
    oat: np.ndarray

    def __len__(self):
        return len(self.values)


def comfort_series(d: ControllerDataset) -> ComfortSeries:
    values = comfort_values(d.temp, d.setpoint, d.band)
    return ComfortSeries(values, np.array(d.oat))
