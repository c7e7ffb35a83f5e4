from dataclasses import replace
from datetime import timedelta

import numpy as np
import pytest

from hvac_compare.datamodel import (ControllerDataset, HourlyRecord, ZoneSample,
                                    check_comparability, validate_dataset)
from hvac_compare.errors import IncomparableConfigs, InsufficientOverlap

from conftest import make_dataset


def _with_record(d, i, **changes):
    recs = list(d.records)
    recs[i] = replace(recs[i], **changes)
    return replace(d, records=tuple(recs))


def test_well_formed_dataset_has_no_violations(small_dataset):
    assert validate_dataset(small_dataset) == []


def test_negative_energy_is_reported():
    d = _with_record(make_dataset(), 17, energy=-1.0)
    v = validate_dataset(d)
    assert [(x.rule, x.index) for x in v] == [("NegativeEnergy", 17)]


def test_equal_timestamps_are_non_monotonic():
    d = make_dataset()
    d = _with_record(d, 41, timestamp=d.records[40].timestamp)
    v = validate_dataset(d)
    assert [(x.rule, x.index) for x in v] == [("NonMonotonicTime", 41)]


def test_other_invariants():
    d = make_dataset()
    d = _with_record(d, 3, oat=float("nan"))
    d = _with_record(d, 5, zones=d.records[5].zones[:1])
    d = _with_record(d, 6, zones=(ZoneSample(70, 72, -1), d.records[6].zones[1]))
    rules = {(x.rule, x.index) for x in validate_dataset(d)}
    assert rules == {("NonFiniteOat", 3), ("ZoneCountMismatch", 5), ("NegativeBand", 6)}


def test_minimum_sample_size():
    assert [v.rule for v in validate_dataset(make_dataset(n=71))] == ["TooFewRecords"]
    assert validate_dataset(make_dataset(n=72)) == []


def test_validate_is_idempotent(small_dataset):
    d = _with_record(small_dataset, 2, energy=-3.0)
    assert validate_dataset(d) == validate_dataset(d)
    assert d.records[2].energy == -3.0


def test_gaps_are_flagged_not_violations():
    d = make_dataset(n=100)
    recs = d.records[:50] + d.records[60:]
    d = replace(d, records=recs)
    assert validate_dataset(d) == []
    assert d.gaps() == [50]
    assert d.missing_hours == 10


def test_column_views_are_read_only(small_dataset):
    assert small_dataset.temp.shape == (100, 2)
    with pytest.raises(ValueError):
        small_dataset.oat[0] = 1.0


def test_comparability_passes_with_overlap():
    d1 = make_dataset(oat=np.linspace(40, 72, 100), seed=1)
    d2 = make_dataset(oat=np.linspace(48, 80, 100), seed=2)
    res = check_comparability(d1, d2)
    assert res.passed
    assert res.support == (48.0, 72.0)


def test_comparability_rejects_different_bands():
    d1 = make_dataset(band=1.0)
    d2 = make_dataset(band=2.0)
    with pytest.raises(IncomparableConfigs, match="comfort band"):
        check_comparability(d1, d2)


def test_comparability_rejects_zone_count_mismatch():
    with pytest.raises(IncomparableConfigs, match="zone counts"):
        check_comparability(make_dataset(zones=2), make_dataset(zones=3))


def test_comparability_rejects_disjoint_oat():
    d1 = make_dataset(oat=np.linspace(40, 50, 100))
    d2 = make_dataset(oat=np.linspace(70, 80, 100))
    with pytest.raises(InsufficientOverlap):
        check_comparability(d1, d2)


def test_bands_compared_by_hour_of_day_not_date():
    # Same daily schedule (2 F at night, 1 F by day) on different dates.
    def scheduled(start_day):
        d = make_dataset(n=96)
        start = d.records[0].timestamp + timedelta(days=start_day)
        recs = []
        for i, r in enumerate(d.records):
            ts = start + timedelta(hours=i)
            hour = (ts + r.utc_offset).hour
            b = 2.0 if hour < 6 else 1.0
            recs.append(replace(r, timestamp=ts,
                                zones=tuple(replace(z, band=b) for z in r.zones)))
        return replace(d, records=tuple(recs))

    assert check_comparability(scheduled(0), scheduled(30)).passed


@pytest.mark.parametrize("b2", [1.0, 1.005, 2.0])
def test_comparability_is_symmetric(b2):
    d1 = make_dataset(band=1.0, seed=3)
    d2 = make_dataset(band=b2, seed=4)

    def outcome(a, b):
        try:
            check_comparability(a, b)
            return "pass"
        except IncomparableConfigs:
            return "fail"

    assert outcome(d1, d2) == outcome(d2, d1)
