"""Core domain types: hourly records, controller datasets and result containers.

Units are fixed at this boundary: temperatures in degrees Fahrenheit, energy
in kWh per hour.  Everything here is immutable once constructed.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from functools import cached_property
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import IncomparableConfigs, InsufficientOverlap

DEFAULT_MIN_RECORDS = 72
BAND_TOLERANCE = 0.01
MISSING_HOURS_WARN_FRACTION = 0.20
ONE_HOUR = timedelta(hours=1)


@dataclass(frozen=True)
class ZoneSample:
    """Hourly averages for one zone: temperature, set point and band half-width."""

    temp: float
    setpoint: float
    band: float


@dataclass(frozen=True)
class HourlyRecord:
    """One hour of building data.

    ``timestamp`` is stored in UTC; ``utc_offset`` keeps the building-local
    offset it was recorded with, which is what hour-of-day binning uses.
    """

    timestamp: datetime
    oat: float
    energy: float
    zones: tuple[ZoneSample, ...]
    utc_offset: timedelta = timedelta(0)

    @property
    def local_time(self) -> datetime:
        return (self.timestamp + self.utc_offset).replace(tzinfo=timezone(self.utc_offset))

    @property
    def local_hour(self) -> int:
        return self.local_time.hour


@dataclass(frozen=True)
class Violation:
    index: int
    rule: str
    detail: str = ""

    def __str__(self):
        extra = f" ({self.detail})" if self.detail else ""
        return f"{self.rule}@{self.index}{extra}"


@dataclass(frozen=True)
class ControllerDataset:
    """Time-ordered hourly records collected while one controller was active."""

    label: str
    zone_count: int
    records: tuple[HourlyRecord, ...]
    min_records: int = DEFAULT_MIN_RECORDS

    def __post_init__(self):
        if not isinstance(self.records, tuple):
            object.__setattr__(self, "records", tuple(self.records))

    @property
    def N(self) -> int:
        return len(self.records)

    def __len__(self):
        return len(self.records)

    @classmethod
    def from_arrays(cls, label, timestamps, oat, energy, temp, setpoint, band,
                    utc_offset=timedelta(0), min_records=DEFAULT_MIN_RECORDS):
        """Build a dataset from column arrays; zone arrays have shape (N, Z)."""
        temp = np.atleast_2d(np.asarray(temp, dtype=float))
        setpoint = np.atleast_2d(np.asarray(setpoint, dtype=float))
        band = np.atleast_2d(np.asarray(band, dtype=float))
        n, z = temp.shape
        records = []
        for i in range(n):
            zones = tuple(
                ZoneSample(float(temp[i, j]), float(setpoint[i, j]), float(band[i, j]))
                for j in range(z)
            )
            records.append(HourlyRecord(timestamps[i], float(oat[i]), float(energy[i]),
                                        zones, utc_offset))
        return cls(label, z, tuple(records), min_records)

    # Column views.  cached_property writes straight into __dict__, which a
    # frozen dataclass permits.
    @cached_property
    def oat(self) -> np.ndarray:
        a = np.array([r.oat for r in self.records], dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def energy(self) -> np.ndarray:
        a = np.array([r.energy for r in self.records], dtype=float)
        a.flags.writeable = False
        return a

    def _zone_field(self, name):
        a = np.array([[getattr(z, name) for z in r.zones] for r in self.records],
                     dtype=float).reshape(self.N, -1)
        a.flags.writeable = False
        return a

    @cached_property
    def temp(self) -> np.ndarray:
        return self._zone_field("temp")

    @cached_property
    def setpoint(self) -> np.ndarray:
        return self._zone_field("setpoint")

    @cached_property
    def band(self) -> np.ndarray:
        return self._zone_field("band")

    @cached_property
    def local_hours(self) -> np.ndarray:
        a = np.array([r.local_hour for r in self.records], dtype=int)
        a.flags.writeable = False
        return a

    @property
    def missing_hours(self) -> int:
        """Hours absent between the first and last timestamp."""
        if self.N < 2:
            return 0
        span = self.records[-1].timestamp - self.records[0].timestamp
        expected = int(span // ONE_HOUR) + 1
        return max(expected - self.N, 0)

    @property
    def missing_fraction(self) -> float:
        total = self.N + self.missing_hours
        return self.missing_hours / total if total else 0.0

    def gaps(self) -> list[int]:
        """Indices i whose record follows a gap of more than one hour."""
        return [i for i in range(1, self.N)
                if self.records[i].timestamp - self.records[i - 1].timestamp > ONE_HOUR]


def validate_dataset(d: ControllerDataset) -> list[Violation]:
    """Check every dataset invariant; an empty list means the dataset is valid.

    Gaps in the hourly sequence are not violations (see
    :meth:`ControllerDataset.gaps`).
    """
    out = []
    if d.zone_count < 1:
        out.append(Violation(-1, "ZoneCount", f"zone_count={d.zone_count}"))
    if d.N < d.min_records:
        out.append(Violation(-1, "TooFewRecords", f"N={d.N} < {d.min_records}"))
    prev = None
    for i, r in enumerate(d.records):
        if not math.isfinite(r.oat):
            out.append(Violation(i, "NonFiniteOat"))
        if not (r.energy >= 0):
            out.append(Violation(i, "NegativeEnergy", f"energy={r.energy}"))
        if len(r.zones) != d.zone_count:
            out.append(Violation(i, "ZoneCountMismatch",
                                 f"{len(r.zones)} zones, expected {d.zone_count}"))
        for j, z in enumerate(r.zones):
            if not (math.isfinite(z.temp) and math.isfinite(z.setpoint)):
                out.append(Violation(i, "NonFiniteZone", f"zone {j + 1}"))
            if not (z.band >= 0):
                out.append(Violation(i, "NegativeBand", f"zone {j + 1}"))
        if prev is not None and not r.timestamp > prev:
            out.append(Violation(i, "NonMonotonicTime"))
        prev = r.timestamp
    return out


@dataclass(frozen=True)
class ComparabilityResult:
    passed: bool
    support: tuple[float, float]
    warnings: tuple[str, ...] = ()


def band_fingerprint(d: ControllerDataset) -> dict[tuple[int, int], tuple[float, float, float]]:
    """(zone, local hour) -> (min, mean, max) of the comfort band half-width."""
    groups = defaultdict(list)
    for r in d.records:
        h = r.local_hour
        for j, z in enumerate(r.zones):
            groups[(j, h)].append(z.band)
    return {k: (min(v), sum(v) / len(v), max(v)) for k, v in groups.items()}


def check_comparability(d1: ControllerDataset, d2: ControllerDataset,
                        min_overlap: float = 5.0,
                        tolerance: float = BAND_TOLERANCE) -> ComparabilityResult:
    """Verify that two controllers ran under the same comfort configuration.

    Band schedules are compared per zone and local hour of day, since the two
    experiments run on different calendar days.  Returns the common OAT
    support on success.

    Raises
    ------
    IncomparableConfigs
        Zone counts differ or a band schedule disagrees by more than
        ``tolerance`` degrees F.
    InsufficientOverlap
        The common OAT range is narrower than ``min_overlap`` degrees F.
    """
    if d1.zone_count != d2.zone_count:
        raise IncomparableConfigs(
            f"zone counts differ: {d1.label!r} has {d1.zone_count}, "
            f"{d2.label!r} has {d2.zone_count}"
        )
    f1, f2 = band_fingerprint(d1), band_fingerprint(d2)
    warnings = []
    for key in sorted(set(f1) | set(f2)):
        if key not in f1 or key not in f2:
            warnings.append(f"zone {key[0] + 1} hour {key[1]:02d}: band not observed "
                            "in both datasets")
            continue
        if any(abs(a - b) > tolerance for a, b in zip(f1[key], f2[key])):
            raise IncomparableConfigs(
                f"comfort band schedules differ for zone {key[0] + 1} at hour "
                f"{key[1]:02d}: {f1[key][1]:g} vs {f2[key][1]:g} F "
                "(comfort settings must be identical across controllers)"
            )
    lo = max(float(d1.oat.min()), float(d2.oat.min()))
    hi = min(float(d1.oat.max()), float(d2.oat.max()))
    if hi - lo < min_overlap:
        raise InsufficientOverlap(
            f"common OAT support [{lo:g}, {hi:g}] F is narrower than {min_overlap:g} F"
        )
    for d in (d1, d2):
        if d.missing_fraction > MISSING_HOURS_WARN_FRACTION:
            warnings.append(f"{d.label}: {100 * d.missing_fraction:.1f}% of hours missing")
    return ComparabilityResult(True, (lo, hi), tuple(warnings))


@dataclass(frozen=True)
class CharacteristicCurve:
    """Smoothed characteristic evaluated on an ascending OAT grid."""

    grid: np.ndarray
    values: np.ndarray
    bandwidth: float
    support: tuple[float, float]
    kind: Literal["energy", "comfort"]
    fallback_points: tuple[int, ...] = ()
    widened_points: tuple[int, ...] = ()

    def __call__(self, t):
        return np.interp(t, self.grid, self.values)


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    name: str
    statistic: float
    p_raw: float
    p_adjusted: float
    replicates: int
    block_length: tuple[int, int]
    alpha: float
    significant: bool
    discarded: int = 0

    def with_adjusted(self, p_adjusted: float) -> "TestResult":
        return TestResult(self.name, self.statistic, self.p_raw, p_adjusted,
                          self.replicates, self.block_length, self.alpha,
                          p_adjusted < self.alpha, self.discarded)


@dataclass(frozen=True)
class IntervalEstimate:
    estimate: float
    level: float
    lower: float
    upper: float
    method: str = "bias-corrected percentile"
    bias_z0: Optional[float] = None
    estimate_outside: bool = False
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class MetricComparison:
    """Both curves, both tests and the optional interval for one metric."""

    kind: Literal["energy", "comfort"]
    curve1: CharacteristicCurve
    curve2: CharacteristicCurve
    daily1: float
    daily2: float
    curve_test: TestResult
    daily_test: TestResult
    interval: Optional[IntervalEstimate] = None

    @property
    def daily_difference(self) -> float:
        return self.daily_test.statistic


@dataclass(frozen=True)
class ComparisonReport:
    config: dict
    seed: int
    labels: tuple[str, str]
    support: tuple[float, float]
    energy: MetricComparison
    comfort: MetricComparison
    warnings: tuple[str, ...] = field(default=())

    @property
    def tests(self) -> tuple[TestResult, ...]:
        return (self.energy.curve_test, self.energy.daily_test,
                self.comfort.curve_test, self.comfort.daily_test)
