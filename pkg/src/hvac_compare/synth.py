"""Synthetic controller datasets with known characteristics.

Outside air temperature follows a daily sinusoid plus slowly varying AR(1)
weather.  Hourly energy is a piecewise quadratic in OAT (lowest at a moderate
temperature) plus AR(1) noise.  Zone temperatures are built so that the
comfort violation of every zone is ``(mu(T_o) + eta)_+`` with Gaussian AR(1)
``eta``.  Its conditional mean then has a closed form.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timedelta, timezone
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.signal import lfilter
from scipy.special import ndtr

from .datamodel import ControllerDataset
from .errors import ConfigError, HvacCompareError, StatisticalError

HOURS = 24


@dataclass(frozen=True)
class SyntheticSpec:
    n_hours: int = 2160
    zone_count: int = 4
    seed: int = 0
    label: str = "synthetic"
    start: str = "2012-06-01T00:00:00-07:00"
    # outside air temperature, degF
    oat_mean: float = 60.0
    oat_daily_amplitude: float = 8.0
    oat_peak_hour: float = 15.0
    weather_phi: float = 0.97
    weather_sd: float = 7.0
    oat_min: float = 30.0
    oat_max: float = 95.0
    # energy characteristic, kWh per hour
    energy_base: float = 40.0
    energy_min_oat: float = 55.0
    heating_curvature: float = 0.04
    cooling_curvature: float = 0.06
    noise_phi: float = 0.6
    noise_sd: float = 2.0
    # comfort: per-zone excess mu(T) = offset + curvature * (distance outside [low, high])^2
    comfort_offset: float = 1.0
    comfort_low_oat: float = 48.0
    comfort_high_oat: float = 68.0
    comfort_curvature: float = 0.01
    zone_noise_phi: float = 0.6
    zone_noise_sd: float = 0.5
    setpoint_day: float = 72.0
    setpoint_night: float = 70.0
    occupied_start: int = 8
    occupied_end: int = 18
    band_schedule: tuple[float, ...] = (1.0,) * HOURS

    def __post_init__(self):
        def need(key, ok, msg):
            if not ok:
                raise ConfigError(key, msg)

        need("n_hours", self.n_hours >= 2, "n_hours must be >= 2")
        need("zone_count", self.zone_count >= 1, "zone_count must be >= 1")
        need("noise_sd", self.noise_sd >= 0, "noise_sd must be >= 0")
        need("zone_noise_sd", self.zone_noise_sd >= 0, "zone_noise_sd must be >= 0")
        need("weather_sd", self.weather_sd >= 0, "weather_sd must be >= 0")
        for key in ("noise_phi", "zone_noise_phi", "weather_phi"):
            need(key, abs(getattr(self, key)) < 1, f"|{key}| must be < 1")
        need("oat_max", self.oat_min < self.oat_max, "oat_min must be < oat_max")
        need("band_schedule", len(self.band_schedule) == HOURS
             and all(b >= 0 for b in self.band_schedule),
             "band_schedule needs 24 nonnegative values")
        need("comfort_high_oat", self.comfort_low_oat <= self.comfort_high_oat,
             "comfort_low_oat must be <= comfort_high_oat")
        try:
            start = datetime.fromisoformat(self.start)
        except ValueError:
            start = None
        need("start", start is not None and start.tzinfo is not None,
             "start must be ISO 8601 with UTC offset")

    # -- true characteristics ------------------------------------------------
    def energy(self, t):
        t = np.asarray(t, dtype=float)
        d = t - self.energy_min_oat
        heat = self.heating_curvature * np.minimum(d, 0.0) ** 2
        cool = self.cooling_curvature * np.maximum(d, 0.0) ** 2
        return self.energy_base + heat + cool

    def energy_integral(self, a: float, b: float) -> float:
        """Closed-form integral of the energy characteristic over [a, b]."""
        m = self.energy_min_oat
        total = self.energy_base * (b - a)
        if a < m:
            total += self.heating_curvature * ((m - a) ** 3 - (m - min(b, m)) ** 3) / 3.0
        if b > m:
            total += self.cooling_curvature * ((b - m) ** 3 - (max(a, m) - m) ** 3) / 3.0
        return total

    def comfort_excess(self, t):
        t = np.asarray(t, dtype=float)
        below = np.maximum(self.comfort_low_oat - t, 0.0)
        above = np.maximum(t - self.comfort_high_oat, 0.0)
        return self.comfort_offset + self.comfort_curvature * (below ** 2 + above ** 2)

    def comfort(self, t):
        """E[(mu + eta)_+] for eta ~ N(0, s^2): mu Phi(mu/s) + s phi(mu/s)."""
        mu = self.comfort_excess(t)
        s = self.zone_noise_sd
        if s == 0:
            return np.maximum(mu, 0.0)
        r = mu / s
        return mu * ndtr(r) + s * np.exp(-0.5 * r * r) / math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class GroundTruth:
    spec: SyntheticSpec
    energy_clip_rate: float

    def energy(self, t):
        return self.spec.energy(t)

    def comfort(self, t):
        return self.spec.comfort(t)

    def energy_day(self, support) -> float:
        """Exact daily energy under a uniform OAT distribution on ``support``."""
        a, b = support
        return HOURS * self.spec.energy_integral(a, b) / (b - a)

    def comfort_day(self, support) -> float:
        a, b = support
        val, _ = integrate.quad(lambda t: float(self.spec.comfort(t)), a, b, limit=200)
        return HOURS * val / (b - a)

    def to_dict(self, support=None) -> dict:
        support = support or (self.spec.oat_min, self.spec.oat_max)
        d = spec_to_dict(self.spec)
        return {
            "spec": d,
            "energy_clip_rate": self.energy_clip_rate,
            "support_F": list(support),
            "energy_day_kWh": self.energy_day(support),
            "comfort_day_Fh": self.comfort_day(support),
        }


def _ar1(rng, n, phi, sd):
    if sd == 0:
        return np.zeros(n)
    z = rng.standard_normal(n)
    y_prev = sd * rng.standard_normal()
    return lfilter([sd * math.sqrt(1 - phi * phi)], [1.0, -phi], z, zi=[phi * y_prev])[0]


def generate_dataset(spec: SyntheticSpec) -> tuple[ControllerDataset, GroundTruth]:
    """Draw one dataset; identical specs (seed included) give identical data."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    n = spec.n_hours
    start = datetime.fromisoformat(spec.start)
    offset = start.utcoffset()
    start_utc = start.astimezone(timezone.utc)
    timestamps = [start_utc + timedelta(hours=i) for i in range(n)]
    local_hour = (start.hour + np.arange(n)) % HOURS

    cycle = spec.oat_daily_amplitude * np.cos(2 * np.pi * (local_hour - spec.oat_peak_hour) / HOURS)
    weather = _ar1(rng, n, spec.weather_phi, spec.weather_sd)
    oat = np.clip(spec.oat_mean + cycle + weather, spec.oat_min, spec.oat_max)

    raw_energy = spec.energy(oat) + _ar1(rng, n, spec.noise_phi, spec.noise_sd)
    clipped = raw_energy < 0
    energy = np.where(clipped, 0.0, raw_energy)

    z = spec.zone_count
    occupied = (local_hour >= spec.occupied_start) & (local_hour < spec.occupied_end)
    sp = np.where(occupied, spec.setpoint_day, spec.setpoint_night)
    setpoint = np.repeat(sp[:, None], z, axis=1)
    band = np.repeat(np.asarray(spec.band_schedule, dtype=float)[local_hour][:, None], z, axis=1)
    mu = spec.comfort_excess(oat)
    excess = np.column_stack([mu + _ar1(rng, n, spec.zone_noise_phi, spec.zone_noise_sd)
                              for _ in range(z)])
    sign = np.where(oat > spec.energy_min_oat, 1.0, -1.0)[:, None]
    temp = setpoint + sign * np.maximum(band + excess, 0.0)

    d = ControllerDataset.from_arrays(spec.label, timestamps, oat, energy, temp, setpoint, band,
                                      utc_offset=offset)
    return d, GroundTruth(spec, float(clipped.mean()))


# -- spec files --------------------------------------------------------------

def spec_to_dict(spec: SyntheticSpec) -> dict:
    d = asdict(spec)
    d["band_schedule"] = list(spec.band_schedule)
    return d


def spec_from_mapping(values: dict[str, str]) -> SyntheticSpec:
    types = {f.name: f.type for f in fields(SyntheticSpec)}
    kwargs = {}
    for key, raw in values.items():
        if key not in types:
            raise ConfigError(key, "unknown key")
        try:
            if key == "band_schedule":
                parts = [float(p) for p in raw.split(",")]
                if len(parts) == 1:
                    parts *= HOURS
                kwargs[key] = tuple(parts)
            elif types[key] in ("int", int):
                kwargs[key] = int(raw)
            elif types[key] in ("float", float):
                kwargs[key] = float(raw)
            else:
                kwargs[key] = raw
        except ValueError:
            raise ConfigError(key, f"cannot parse {raw!r}") from None
    return SyntheticSpec(**kwargs)


def read_spec(path) -> SyntheticSpec:
    from .ingest import read_key_values

    return spec_from_mapping(read_key_values(path))


def write_truth(truth: GroundTruth, path, support=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(truth.to_dict(support), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- Monte Carlo studies -----------------------------------------------------

class StudyFailure(StatisticalError):
    module = "synth"

    def __init__(self, trial, cause):
        self.trial = trial
        self.cause = cause
        super().__init__(f"trial {trial}: {type(cause).__name__}: {cause}")


TEST_NAMES = ("energy curve", "energy daily", "comfort curve", "comfort daily")


@dataclass(frozen=True)
class TrialOutcome:
    index: int
    p_raw: tuple[float, ...]
    p_adjusted: tuple[float, ...]
    energy_difference: float
    true_energy_difference: float
    energy_interval: Optional[tuple[float, float]]
    comfort_difference: float
    true_comfort_difference: float
    comfort_interval: Optional[tuple[float, float]]


@dataclass(frozen=True)
class StudySummary:
    trials: int
    alpha: float
    replicates: int
    outcomes: tuple[TrialOutcome, ...]

    def _rate(self, attr):
        p = np.array([getattr(o, attr) for o in self.outcomes])
        return {name: float(np.mean(p[:, k] < self.alpha)) for k, name in enumerate(TEST_NAMES)}

    @property
    def rejection_rate(self) -> dict[str, float]:
        """Per-test rate of raw p-values below alpha."""
        return self._rate("p_raw")

    @property
    def rejection_rate_adjusted(self) -> dict[str, float]:
        return self._rate("p_adjusted")

    @property
    def floor_rate(self) -> dict[str, float]:
        """Fraction of trials at the smallest attainable p-value, 1/(B+1)."""
        p = np.array([o.p_raw for o in self.outcomes])
        floor = 1.0 / (self.replicates + 1)
        return {name: float(np.mean(np.isclose(p[:, k], floor)))
                for k, name in enumerate(TEST_NAMES)}

    def _coverage(self, which):
        hits = []
        for o in self.outcomes:
            iv = getattr(o, f"{which}_interval")
            if iv is not None:
                truth = getattr(o, f"true_{which}_difference")
                hits.append(iv[0] <= truth <= iv[1])
        return float(np.mean(hits)) if hits else float("nan")

    @property
    def energy_coverage(self) -> float:
        return self._coverage("energy")

    @property
    def comfort_coverage(self) -> float:
        return self._coverage("comfort")

    def table(self) -> str:
        raw, adj, floor = self.rejection_rate, self.rejection_rate_adjusted, self.floor_rate
        lines = [f"trials={self.trials} alpha={self.alpha:g} B={self.replicates}",
                 f"{'test':<15} {'reject(raw)':>11} {'reject(adj)':>11} {'p at floor':>10}"]
        for name in TEST_NAMES:
            lines.append(f"{name:<15} {raw[name]:>11.3f} {adj[name]:>11.3f} {floor[name]:>10.3f}")
        lines.append(f"energy CI coverage  {self.energy_coverage:.3f}")
        lines.append(f"comfort CI coverage {self.comfort_coverage:.3f}")
        return "\n".join(lines)


def _derived_seed(root: int, *key: int) -> int:
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_trial(spec1: SyntheticSpec, spec2: SyntheticSpec, cfg, index: int,
              intervals: bool = True) -> TrialOutcome:
    from .pipeline import compare_datasets

    d1, g1 = generate_dataset(replace(spec1, seed=_derived_seed(cfg.seed, index, 1),
                                      label="controller1"))
    d2, g2 = generate_dataset(replace(spec2, seed=_derived_seed(cfg.seed, index, 2),
                                      label="controller2"))
    trial_cfg = replace(cfg, seed=_derived_seed(cfg.seed, index, 3))
    report = compare_datasets(d1, d2, trial_cfg, intervals="always" if intervals else "never")
    support = report.support
    e, c = report.energy, report.comfort

    def bounds(m):
        return None if m.interval is None else (m.interval.lower, m.interval.upper)

    return TrialOutcome(
        index=index,
        p_raw=tuple(t.p_raw for t in report.tests),
        p_adjusted=tuple(t.p_adjusted for t in report.tests),
        energy_difference=e.daily_difference,
        true_energy_difference=g2.energy_day(support) - g1.energy_day(support),
        energy_interval=bounds(e),
        comfort_difference=c.daily_difference,
        true_comfort_difference=g2.comfort_day(support) - g1.comfort_day(support),
        comfort_interval=bounds(c),
    )


def monte_carlo_study(spec1: SyntheticSpec, spec2: SyntheticSpec, cfg, trials: int,
                      intervals: bool = True, progress=None) -> StudySummary:
    """Repeat the full comparison on ``trials`` freshly generated dataset pairs.

    Trial ``t`` draws its datasets and bootstrap seed from ``(cfg.seed, t)``,
    so any single trial can be re-run on its own.  Intervals are computed in
    every trial (not only significant ones) so coverage is measured for the
    interval procedure itself.
    """
    if trials < 50:
        raise ValueError(f"a study needs at least 50 trials, got {trials}")
    outcomes = []
    for t in range(trials):
        try:
            outcomes.append(run_trial(spec1, spec2, cfg, t, intervals))
        except HvacCompareError as exc:
            raise StudyFailure(t, exc) from exc
        if progress is not None:
            progress(t + 1, trials)
    return StudySummary(trials, cfg.alpha, cfg.replicates, tuple(outcomes))
