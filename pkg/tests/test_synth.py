import json

import numpy as np
import pytest
from scipy import integrate

from hvac_compare.comfort import comfort_series
from hvac_compare.errors import ConfigError
from hvac_compare.ingest import AnalysisConfig
from hvac_compare.synth import (SyntheticSpec, generate_dataset, monte_carlo_study, read_spec,
                                run_trial, write_truth)


def test_noise_free_data_lies_on_truth():
    spec = SyntheticSpec(n_hours=500, noise_sd=0.0, zone_noise_sd=0.0, seed=3)
    d, truth = generate_dataset(spec)
    np.testing.assert_allclose(d.energy, truth.energy(d.oat), rtol=1e-12)
    np.testing.assert_allclose(comfort_series(d).values, truth.comfort(d.oat), atol=1e-12)
    assert truth.energy_clip_rate == 0.0


def test_same_seed_same_data():
    a, _ = generate_dataset(SyntheticSpec(n_hours=300, seed=9))
    b, _ = generate_dataset(SyntheticSpec(n_hours=300, seed=9))
    c, _ = generate_dataset(SyntheticSpec(n_hours=300, seed=10))
    assert a.records == b.records
    assert not np.array_equal(a.oat, c.oat)


def test_oat_stays_in_configured_range():
    spec = SyntheticSpec(seed=4)
    d, _ = generate_dataset(spec)
    assert d.oat.min() >= spec.oat_min and d.oat.max() <= spec.oat_max
    assert d.N == 2160 and d.zone_count == 4
    assert np.all(d.energy >= 0)


def test_u_shape_has_minimum_at_configured_oat():
    spec = SyntheticSpec()
    t = np.linspace(30, 95, 651)
    assert t[np.argmin(spec.energy(t))] == pytest.approx(55.0)
    c = spec.comfort(t)
    assert c[0] > c[250] and c[-1] > c[300]


@pytest.mark.parametrize("support", [(30.0, 95.0), (40.0, 52.0), (58.0, 80.0), (54.9, 55.1)])
def test_closed_form_energy_integral(support):
    spec = SyntheticSpec()
    quad, _ = integrate.quad(lambda t: float(spec.energy(t)), *support, points=[55.0])
    assert spec.energy_integral(*support) == pytest.approx(quad, rel=1e-6)


def test_comfort_truth_matches_simulated_mean():
    spec = SyntheticSpec()
    rng = np.random.default_rng(0)
    for t in (35.0, 60.0, 85.0):
        mu = spec.comfort_excess(t)
        sim = np.maximum(mu + rng.normal(0, spec.zone_noise_sd, 400_000), 0).mean()
        assert spec.comfort(t) == pytest.approx(sim, abs=3e-3)


def test_comfort_truth_with_frequent_clipping():
    spec = SyntheticSpec(comfort_offset=-0.3, zone_noise_sd=0.5)
    sim = np.maximum(-0.3 + np.random.default_rng(1).normal(0, 0.5, 400_000), 0).mean()
    assert spec.comfort(60.0) == pytest.approx(sim, abs=3e-3)


def test_invalid_spec():
    with pytest.raises(ConfigError) as exc:
        SyntheticSpec(noise_phi=1.0)
    assert exc.value.key == "noise_phi"
    with pytest.raises(ConfigError):
        SyntheticSpec(start="2012-06-01T00:00:00")


def test_spec_file_and_truth(tmp_path):
    p = tmp_path / "spec.txt"
    p.write_text("n_hours = 240\nenergy_base = 41.5\nband_schedule = 1.5\nseed = 2\n")
    spec = read_spec(p)
    assert spec.n_hours == 240 and spec.energy_base == 41.5
    assert spec.band_schedule == (1.5,) * 24
    _, truth = generate_dataset(spec)
    out = tmp_path / "truth.json"
    write_truth(truth, out, (40.0, 80.0))
    data = json.loads(out.read_text())
    assert data["energy_day_kWh"] == pytest.approx(truth.energy_day((40.0, 80.0)))


def test_unit_shift_truth_is_24_per_day():
    base = SyntheticSpec()
    _, g1 = generate_dataset(SyntheticSpec(n_hours=100))
    _, g2 = generate_dataset(SyntheticSpec(n_hours=100, energy_base=base.energy_base + 1))
    assert g2.energy_day((35.0, 85.0)) - g1.energy_day((35.0, 85.0)) == pytest.approx(24.0)


def test_trial_is_reproducible():
    spec = SyntheticSpec(n_hours=400)
    cfg = AnalysisConfig(replicates=99, seed=1)
    a = run_trial(spec, spec, cfg, 4)
    b = run_trial(spec, spec, cfg, 4)
    assert a == b
    assert a.true_energy_difference == 0.0


def test_study_needs_fifty_trials():
    with pytest.raises(ValueError, match="50"):
        monte_carlo_study(SyntheticSpec(), SyntheticSpec(), AnalysisConfig(), 10)
