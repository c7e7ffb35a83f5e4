"""Serialising a :class:`ComparisonReport` to JSON and CSV tables.

Every numeric value in the JSON document is written as ``{"value": x, "unit":
u}``.  Energy is kept in kWh internally; MWh appear only in display strings.
"""
from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

from .comfort import comfort_series
from .datamodel import ComparisonReport, ControllerDataset, IntervalEstimate, TestResult
from .ingest import format_timestamp

UNITS = {
    "energy": {"curve": "kWh/h", "daily": "kWh/day", "distance": "(kWh/h)^2"},
    "comfort": {"curve": "degF*h/h", "daily": "degF*h/day", "distance": "(degF*h/h)^2"},
}
CONFIG_UNITS = {
    "alpha": "1", "beta": "1", "replicates": "1", "block_length": "h", "bandwidth": "degF",
    "grid_points": "1", "seed": "1", "min_overlap": "degF", "min_records": "1",
}


def q(value, unit):
    return {"value": value, "unit": unit}


def _config(cfg: dict) -> dict:
    out = {}
    for k, v in cfg.items():
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            out[k] = q(v, CONFIG_UNITS.get(k, "1"))
        else:
            out[k] = v
    return out


def _test(t: TestResult, metric: str, statistic_unit: str) -> dict:
    return {
        "name": t.name,
        "metric": metric,
        "statistic": q(t.statistic, statistic_unit),
        "p_raw": q(t.p_raw, "1"),
        "p_adjusted": q(t.p_adjusted, "1"),
        "alpha": q(t.alpha, "1"),
        "significant": t.significant,
        "replicates": q(t.replicates, "1"),
        "discarded_replicates": q(t.discarded, "1"),
        "block_length": [q(l, "h") for l in t.block_length],
    }


def _interval(iv: IntervalEstimate, unit: str) -> dict:
    return {
        "estimate": q(iv.estimate, unit),
        "level": q(iv.level, "1"),
        "lower": q(iv.lower, unit),
        "upper": q(iv.upper, unit),
        "method": iv.method,
        "bias_z0": None if iv.bias_z0 is None else q(iv.bias_z0, "1"),
        "estimate_outside_interval": iv.estimate_outside,
    }


def display_energy(kwh_per_day: float) -> str:
    return f"{kwh_per_day / 1000.0:+.3f} MWh/day"


def interpret(kind: str, difference: float, significant: bool) -> str:
    if not significant:
        return "difference is not statistically significant"
    if kind == "energy":
        unit = display_energy(abs(difference)).lstrip("+")
        if difference < 0:
            return f"controller 2 uses less energy than controller 1 (saves {unit})"
        return f"controller 2 uses more energy than controller 1 (by {unit})"
    amount = f"{abs(difference):.3g} degF*h/day"
    if difference < 0:
        return f"controller 2 gives better comfort than controller 1 ({amount} fewer violations)"
    return f"controller 2 gives worse comfort than controller 1 ({amount} more violations)"


def report_dict(r: ComparisonReport) -> dict:
    out = {
        "controllers": {"controller1": r.labels[0], "controller2": r.labels[1]},
        "seed": q(r.seed, "1"),
        "config": _config(r.config),
        "support": {"lower": q(r.support[0], "degF"), "upper": q(r.support[1], "degF")},
    }
    tests = []
    for m in (r.energy, r.comfort):
        u = UNITS[m.kind]
        block = {
            "bandwidth": q(m.curve1.bandwidth, "degF"),
            "grid_points": q(len(m.curve1.grid), "1"),
            "daily_total": {"controller1": q(m.daily1, u["daily"]),
                            "controller2": q(m.daily2, u["daily"])},
            "daily_difference": q(m.daily_difference, u["daily"]),
            "interpretation": interpret(m.kind, m.daily_difference, m.daily_test.significant),
            "interval": None if m.interval is None else _interval(m.interval, u["daily"]),
        }
        if m.kind == "energy":
            block["daily_difference_display"] = display_energy(m.daily_difference)
        out[m.kind] = block
        tests.append(_test(m.curve_test, m.kind, u["distance"]))
        tests.append(_test(m.daily_test, m.kind, u["daily"]))
    out["tests"] = tests
    out["warnings"] = list(r.warnings)
    return out


def report_json(r: ComparisonReport) -> str:
    return json.dumps(report_dict(r), indent=2, sort_keys=False) + "\n"


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def curve_table(r: ComparisonReport, kind: str) -> str:
    m = r.energy if kind == "energy" else r.comfort
    unit = UNITS[kind]["curve"].replace("*", "").replace("/", "_per_")
    header = ["oat_degF", f"controller1_{unit}", f"controller2_{unit}"]
    rows = ([repr(float(t)), repr(float(a)), repr(float(b))]
            for t, a, b in zip(m.curve1.grid, m.curve1.values, m.curve2.values))
    return _table(header, rows)


def scatter_table(d: ControllerDataset) -> str:
    c = comfort_series(d).values
    rows = ([format_timestamp(rec.timestamp, rec.utc_offset), repr(rec.oat), repr(rec.energy),
             repr(float(ci))] for rec, ci in zip(d.records, c))
    return _table(["timestamp", "oat_degF", "energy_kWh", "comfort_degFh"], rows)


def write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_report_files(r: ComparisonReport, d1: ControllerDataset, d2: ControllerDataset,
                       out_dir) -> list[Path]:
    """Write report.json, the two curve tables and one scatter table per controller."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "report.json": report_json(r),
        "curves_energy.csv": curve_table(r, "energy"),
        "curves_comfort.csv": curve_table(r, "comfort"),
        "scatter_controller1.csv": scatter_table(d1),
        "scatter_controller2.csv": scatter_table(d2),
    }
    written = []
    for name, text in files.items():
        write_atomic(out / name, text)
        written.append(out / name)
    return written
