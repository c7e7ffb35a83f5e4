from dataclasses import replace

import numpy as np
import pytest

from hvac_compare.aggregate import (daily_total, daily_weights, hourly_average,
                                    hourly_distribution, interval_weights, pooled_distribution)
from hvac_compare.datamodel import CharacteristicCurve
from hvac_compare.errors import EmptyInterval
from hvac_compare.ingest import AnalysisConfig
from hvac_compare.smooth import ScatterData, fit_characteristic

from conftest import make_dataset


def curve(grid, values, kind="energy"):
    grid = np.asarray(grid, float)
    return CharacteristicCurve(grid, np.asarray(values, float), 2.0,
                               (grid[0], grid[-1]), kind)


GRID = np.linspace(40, 80, 101)


@pytest.mark.parametrize("a,b", [(40, 80), (41.3, 42.1), (50, 77.77)])
def test_constant_curve_average(a, b):
    assert hourly_average(curve(GRID, np.full(101, 3.5)), a, b) == pytest.approx(3.5, rel=1e-12)


def test_affine_curve_average_is_midpoint_value():
    c = curve(GRID, 2 * GRID + 1)
    assert hourly_average(c, 50, 60) == pytest.approx(111.0, rel=1e-12)
    # Endpoints between grid points.
    assert hourly_average(c, 50.13, 61.91) == pytest.approx(2 * 56.02 + 1, rel=1e-12)


def test_u_shaped_curve_matches_riemann_sum(synthetic_pair):
    d = synthetic_pair[0]
    data = ScatterData(d.oat, d.energy)
    c = fit_characteristic(data, AnalysisConfig(), data.support)
    a, b = data.support
    mid = a + (np.arange(10_000) + 0.5) * (b - a) / 10_000
    oracle = np.mean(c(mid))
    assert hourly_average(c, a, b) == pytest.approx(oracle, rel=1e-3)


def test_empty_interval():
    with pytest.raises(EmptyInterval):
        hourly_average(curve(GRID, GRID), 60, 60)


def test_interval_beyond_support():
    with pytest.raises(ValueError):
        interval_weights(GRID, 35, 60)


def test_constant_daily_total():
    c = curve(GRID, np.full(101, 2.0))
    assert daily_total(c, pooled_distribution((40, 80))) == pytest.approx(48.0, rel=1e-12)
    assert daily_total(c, pooled_distribution((45, 70))) == pytest.approx(48.0, rel=1e-12)


def test_unit_shift_adds_24_per_day(synthetic_pair):
    d = synthetic_pair[0]
    cfg = AnalysisConfig()
    data = ScatterData(d.oat, d.energy)
    shifted = ScatterData(d.oat, d.energy + 1.0)
    c1 = fit_characteristic(data, cfg, data.support, bandwidth=3.0)
    c2 = fit_characteristic(shifted, cfg, data.support, bandwidth=3.0)
    dist = pooled_distribution(data.support)
    assert daily_total(c2, dist) - daily_total(c1, dist) == pytest.approx(24.0, rel=1e-9)
    assert daily_total(c1, dist) - daily_total(c1, dist) == 0.0


def test_difference_is_antisymmetric():
    rng = np.random.default_rng(0)
    c1, c2 = curve(GRID, rng.normal(size=101)), curve(GRID, rng.normal(size=101))
    dist = pooled_distribution((42.5, 77.0))
    d12 = daily_total(c2, dist) - daily_total(c1, dist)
    d21 = daily_total(c1, dist) - daily_total(c2, dist)
    assert d12 == -d21


def test_hourly_mode_with_full_range_hours_equals_pooled():
    # Every hour spans the whole support, so both modes agree.
    n = 24 * 10
    oat = np.tile(np.linspace(40, 80, 10), 24).reshape(24, 10).T.ravel()
    d = make_dataset(n=n, oat=oat)
    dist_h = hourly_distribution([d], (40.0, 80.0))
    assert all(iv == (40.0, 80.0) for iv in dist_h.intervals())
    c = curve(GRID, np.sin(GRID / 7))
    assert daily_total(c, dist_h) == pytest.approx(daily_total(c, pooled_distribution((40, 80))),
                                                   rel=1e-12)


def test_hourly_mode_weights_each_hour_separately():
    # Night hours 0-11 see 40-60 F, day hours 12-23 see 60-80 F.
    n = 24 * 6
    hours = np.arange(n) % 24
    rng = np.random.default_rng(1)
    oat = np.where(hours < 12, rng.uniform(40, 60, n), rng.uniform(60, 80, n))
    oat[hours == 0] = [40, 60, 50, 45, 55, 52]
    oat[hours == 12] = [60, 80, 70, 65, 75, 72]
    d = make_dataset(n=n, oat=oat)
    dist = hourly_distribution([d], (40.0, 80.0))
    c = curve(GRID, 2 * GRID + 1)
    assert dist.intervals()[0] == (40.0, 60.0) and dist.intervals()[12] == (60.0, 80.0)
    expected = sum(2 * (a + b) / 2 + 1 for a, b in dist.intervals())
    assert daily_total(c, dist) == pytest.approx(expected, rel=1e-12)
    w = daily_weights(GRID, dist)
    assert w.sum() == pytest.approx(24.0)


def test_hour_without_data_is_named():
    d = make_dataset(n=100)
    keep = tuple(r for r in d.records if r.local_hour != 5)
    with pytest.raises(EmptyInterval) as exc:
        hourly_distribution([replace(d, records=keep)], (50.0, 70.0))
    assert exc.value.hour == 5
