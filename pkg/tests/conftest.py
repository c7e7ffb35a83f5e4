from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from hvac_compare.datamodel import ControllerDataset, HourlyRecord, ZoneSample
from hvac_compare.synth import SyntheticSpec, generate_dataset

PDT = timezone(timedelta(hours=-7))


def make_dataset(n=100, zones=2, label="d", start=datetime(2012, 6, 1, tzinfo=PDT),
                 oat=None, energy=None, band=1.0, seed=0):
    rng = np.random.default_rng(seed)
    oat = rng.uniform(45, 80, n) if oat is None else np.asarray(oat, float)
    energy = rng.uniform(20, 60, n) if energy is None else np.asarray(energy, float)
    setpoint = np.full((n, zones), 72.0)
    temp = setpoint + rng.uniform(-2, 2, (n, zones))
    bands = np.full((n, zones), band)
    offset = start.utcoffset()
    ts = [start.astimezone(timezone.utc) + timedelta(hours=i) for i in range(n)]
    return ControllerDataset.from_arrays(label, ts, oat, energy, temp, setpoint, bands,
                                         utc_offset=offset)


@pytest.fixture
def small_dataset():
    return make_dataset()


@pytest.fixture(scope="session")
def synthetic_pair():
    """Two default synthetic controllers, shorter than the acceptance runs."""
    d1, g1 = generate_dataset(SyntheticSpec(n_hours=720, seed=11, label="c1"))
    d2, g2 = generate_dataset(SyntheticSpec(n_hours=720, seed=12, label="c2",
                                            start="2012-07-15T00:00:00-07:00"))
    return d1, d2, g1, g2


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
