import json

import numpy as np
import pytest

from hvac_compare.cli import main
from hvac_compare.ingest import write_dataset_csv
from hvac_compare.synth import SyntheticSpec, generate_dataset

from conftest import make_dataset


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    d1, _ = generate_dataset(SyntheticSpec(n_hours=480, seed=1, label="a"))
    d2, _ = generate_dataset(SyntheticSpec(n_hours=480, seed=2, label="b", energy_base=43.0))
    write_dataset_csv(d1, root / "a.csv")
    write_dataset_csv(d2, root / "b.csv")
    (root / "cfg.txt").write_text("alpha = 0.05\nreplicates = 99\nseed = 3\n")
    return root


def run(*args):
    return main([str(a) for a in args])


def test_compare_writes_report(workdir, capsys):
    out = workdir / "out"
    assert run("compare", workdir / "a.csv", workdir / "b.csv", "--config", workdir / "cfg.txt",
               "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert len(report["tests"]) == 4
    for t in report["tests"]:
        assert 0 < t["p_raw"]["value"] <= 1
        assert t["p_raw"]["unit"] == "1"
    assert report["energy"]["daily_difference"]["unit"] == "kWh/day"
    assert report["energy"]["daily_difference"]["value"] == pytest.approx(72.0, abs=30)
    assert report["energy"]["interval"] is not None
    for name in ("curves_energy.csv", "curves_comfort.csv", "scatter_controller1.csv",
                 "scatter_controller2.csv"):
        assert (out / name).exists()
    assert "energy daily" in capsys.readouterr().out


def test_dataset_against_itself(workdir):
    out = workdir / "self"
    assert run("compare", workdir / "a.csv", workdir / "a.csv", "--config", workdir / "cfg.txt",
               "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert [t["p_raw"]["value"] for t in report["tests"]] == [1.0] * 4
    assert report["energy"]["interval"] is None and report["comfort"]["interval"] is None


def test_reports_identical_across_runs_and_workers(workdir):
    outputs = []
    for k, workers in enumerate((1, 1, 3)):
        out = workdir / f"det{k}"
        assert run("compare", workdir / "a.csv", workdir / "b.csv", "--config",
                   workdir / "cfg.txt", "--out", out, "--workers", workers) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outputs[0] == outputs[1] == outputs[2]


def test_seed_flag_beats_environment(workdir, monkeypatch):
    monkeypatch.setenv("CONTROLLER_COMPARE_SEED", "11")
    assert run("compare", workdir / "a.csv", workdir / "b.csv", "--config", workdir / "cfg.txt",
               "--out", workdir / "s1", "--seed", "5") == 0
    assert run("compare", workdir / "a.csv", workdir / "b.csv", "--config", workdir / "cfg.txt",
               "--out", workdir / "s2") == 0
    assert json.loads((workdir / "s1" / "report.json").read_text())["seed"]["value"] == 5
    assert json.loads((workdir / "s2" / "report.json").read_text())["seed"]["value"] == 11


def test_mismatched_bands_exit_2(workdir, capsys):
    write_dataset_csv(make_dataset(n=100, band=1.0, seed=1), workdir / "band1.csv")
    write_dataset_csv(make_dataset(n=100, band=2.0, seed=2), workdir / "band2.csv")
    code = run("compare", workdir / "band1.csv", workdir / "band2.csv", "--config",
               workdir / "cfg.txt", "--out", workdir / "bad")
    assert code == 2
    err = capsys.readouterr().err
    assert "error [datamodel]" in err and "band" in err


def test_bad_config_exit_2(workdir, capsys):
    (workdir / "bad.txt").write_text("alpha = 1.5\n")
    code = run("compare", workdir / "a.csv", workdir / "b.csv", "--config", workdir / "bad.txt",
               "--out", workdir / "x")
    assert code == 2
    assert "alpha" in capsys.readouterr().err


def test_missing_file_exit_2(workdir):
    assert run("compare", workdir / "nope.csv", workdir / "b.csv", "--out", workdir / "x") == 2


def test_degenerate_bootstrap_exit_3(workdir, capsys):
    # Constant energy per controller: the shift is certain, so every interval
    # replicate equals the estimate.
    oat = np.linspace(40, 80, 120)
    base = make_dataset(n=120, oat=oat, energy=np.full(120, 30.0), seed=1)
    shifted = make_dataset(n=120, oat=oat, energy=np.full(120, 33.0), seed=1)
    write_dataset_csv(base, workdir / "flat1.csv")
    write_dataset_csv(shifted, workdir / "flat2.csv")
    code = run("compare", workdir / "flat1.csv", workdir / "flat2.csv", "--config",
               workdir / "cfg.txt", "--out", workdir / "flat")
    assert code == 3
    assert "error [infer]" in capsys.readouterr().err


def test_synth_command(tmp_path):
    spec = tmp_path / "spec.txt"
    spec.write_text("n_hours = 200\nseed = 4\n")
    out = tmp_path / "d.csv"
    assert run("synth", spec, "--out", out) == 0
    assert len(out.read_text().splitlines()) == 201
    truth = json.loads((tmp_path / "d.csv.truth.json").read_text())
    assert truth["spec"]["seed"] == 4
    again = tmp_path / "again.csv"
    assert run("synth", spec, "--out", again) == 0
    assert again.read_bytes() == out.read_bytes()


def test_mc_needs_fifty_trials(tmp_path, capsys):
    spec = tmp_path / "spec.txt"
    spec.write_text("")
    assert run("mc", spec, spec, "--trials", 10) == 2
    assert "50" in capsys.readouterr().err
