"""Reading controller datasets and analysis settings from files.

Dataset CSV layout, one row per hour::

    timestamp,oat,energy,zone1_temp,zone1_setpoint,zone1_band,...,zoneZ_band

Timestamps are ISO 8601 with an explicit UTC offset.  Meter and thermostat
rows are assumed to be aligned to the same hour before they get here.

Config files are flat ``key = value`` text with ``#`` comments.
"""
from __future__ import annotations

import csv
import math
import os
import re
from dataclasses import asdict, dataclass, fields, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Literal, Optional, Union

from .datamodel import DEFAULT_MIN_RECORDS, ControllerDataset, HourlyRecord, ZoneSample
from .errors import ConfigError, EmptyFile, ParseError, SchemaError

SEED_ENV_VAR = "CONTROLLER_COMPARE_SEED"
ZONE_FIELDS = ("temp", "setpoint", "band")

# Plain decimal notation only: no thousands separators, no nan/inf.
_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_OFFSET = re.compile(r"([+-])(\d{2}):?(\d{2})$")


@dataclass(frozen=True)
class AnalysisConfig:
    alpha: float = 0.01
    beta: float = 0.95
    replicates: int = 499
    block_length: Union[int, Literal["auto"]] = "auto"
    bandwidth: Union[float, Literal["auto"]] = "auto"
    grid_points: int = 101
    oat_distribution: Literal["pooled-uniform", "hourly-uniform"] = "pooled-uniform"
    seed: int = 0
    min_overlap: float = 5.0
    min_records: int = DEFAULT_MIN_RECORDS
    bonferroni_family: Literal["metric", "all"] = "metric"
    workers: int = 1

    def __post_init__(self):
        check = _check_config
        check("alpha", 0 < self.alpha < 1, "alpha must lie in (0,1)")
        check("beta", 0 < self.beta < 1, "beta must lie in (0,1)")
        check("replicates", self.replicates >= 99, "replicates must be >= 99")
        check("grid_points", self.grid_points >= 11, "grid_points must be >= 11")
        check("block_length",
              self.block_length == "auto"
              or (isinstance(self.block_length, int) and self.block_length >= 1),
              "block_length must be a positive integer or 'auto'")
        check("bandwidth",
              self.bandwidth == "auto"
              or (isinstance(self.bandwidth, (int, float)) and math.isfinite(self.bandwidth)
                  and self.bandwidth > 0),
              "bandwidth must be positive or 'auto'")
        check("oat_distribution",
              self.oat_distribution in ("pooled-uniform", "hourly-uniform"),
              "oat_distribution must be pooled-uniform or hourly-uniform")
        check("seed", 0 <= self.seed < 2**64, "seed must be a 64-bit unsigned integer")
        check("min_overlap", self.min_overlap >= 0, "min_overlap must be >= 0")
        check("min_records", self.min_records >= 1, "min_records must be >= 1")
        check("bonferroni_family", self.bonferroni_family in ("metric", "all"),
              "bonferroni_family must be metric or all")
        check("workers", self.workers >= 1, "workers must be >= 1")

    def as_dict(self) -> dict:
        """Analysis settings; ``workers`` is left out because it cannot change results."""
        d = asdict(self)
        del d["workers"]
        return d


def _check_config(key, ok, constraint):
    if not ok:
        raise ConfigError(key, constraint)


def resolve_block_length(block_length, n: int) -> int:
    """Block length for a series of length ``n``; "auto" means ceil(n ** (1/3)).

    The cube root is taken in integers so that perfect cubes are not bumped
    up by floating point error.
    """
    if block_length != "auto":
        return min(int(block_length), n)
    l = max(int(round(n ** (1.0 / 3.0))) - 1, 1)
    while l ** 3 < n:
        l += 1
    return l


def _convert(key, raw: str, kind):
    try:
        if kind is float:
            if not _NUMBER.fullmatch(raw):
                raise ValueError
            return float(raw)
        if kind is int:
            if not re.fullmatch(r"[+-]?\d+", raw):
                raise ValueError
            return int(raw)
        return raw
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None


_CONFIG_TYPES = {
    "alpha": float, "beta": float, "replicates": int, "grid_points": int,
    "seed": int, "min_overlap": float, "min_records": int, "workers": int,
    "oat_distribution": str, "bonferroni_family": str,
}


def config_from_mapping(values: dict[str, str]) -> AnalysisConfig:
    known = {f.name for f in fields(AnalysisConfig)}
    kwargs = {}
    for key, raw in values.items():
        if key not in known:
            raise ConfigError(key, "unknown key")
        if key == "block_length":
            kwargs[key] = "auto" if raw == "auto" else _convert(key, raw, int)
        elif key == "bandwidth":
            kwargs[key] = "auto" if raw == "auto" else _convert(key, raw, float)
        else:
            kwargs[key] = _convert(key, raw, _CONFIG_TYPES[key])
    return AnalysisConfig(**kwargs)


def read_key_values(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", "expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


def parse_config(path, environ=None) -> AnalysisConfig:
    """Read an analysis config; missing keys take their defaults.

    The ``CONTROLLER_COMPARE_SEED`` environment variable, when set, overrides
    the file's seed.
    """
    cfg = config_from_mapping(read_key_values(path))
    return apply_seed_env(cfg, environ)


def apply_seed_env(cfg: AnalysisConfig, environ=None) -> AnalysisConfig:
    environ = os.environ if environ is None else environ
    raw = environ.get(SEED_ENV_VAR)
    if raw is None or raw == "":
        return cfg
    return replace(cfg, seed=_convert(SEED_ENV_VAR, raw.strip(), int))


# -- datasets ----------------------------------------------------------------

def dataset_header(zone_count: int) -> list[str]:
    cols = ["timestamp", "oat", "energy"]
    for j in range(1, zone_count + 1):
        cols += [f"zone{j}_{f}" for f in ZONE_FIELDS]
    return cols


def parse_timestamp(token: str) -> tuple[datetime, timedelta]:
    """Parse an ISO 8601 timestamp with offset into (UTC datetime, offset)."""
    s = token.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    if not _OFFSET.search(s):
        raise ValueError("missing UTC offset")
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        raise ValueError("missing UTC offset")
    offset = dt.utcoffset()
    return dt.astimezone(timezone.utc), offset


def format_timestamp(ts: datetime, offset: timedelta) -> str:
    return (ts + offset).replace(tzinfo=timezone(offset)).isoformat()


def _number(token, row, column):
    t = token.strip()
    if not _NUMBER.fullmatch(t):
        raise ParseError(row, column, token)
    return float(t)


def _infer_zone_count(header):
    extra = len(header) - 3
    if extra <= 0 or extra % 3:
        raise SchemaError("zone columns", f"cannot infer zone count from {len(header)} columns")
    return extra // 3


def parse_dataset_csv(path, zone_count: Optional[int] = None, label: Optional[str] = None,
                      min_records: int = DEFAULT_MIN_RECORDS) -> ControllerDataset:
    """Parse a dataset CSV into a :class:`ControllerDataset`, sorted by time.

    Row numbers in :class:`ParseError` are 1-based file lines, counting the
    header as line 1.  When ``zone_count`` is None it is inferred from the
    header width.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(c.strip() for c in header):
            raise EmptyFile(f"{path}: file is empty")
        header = [c.strip() for c in header]
        if zone_count is None:
            zone_count = _infer_zone_count(header)
        expected = dataset_header(zone_count)
        for col in expected:
            if col not in header:
                raise SchemaError(col, f"missing column {col!r}")
        for col in header:
            if col not in expected:
                raise SchemaError(col, f"unexpected column {col!r}")
        if header != expected:
            raise SchemaError(header[0], "columns out of order; expected " + ",".join(expected))

        records = []
        for lineno, row in enumerate(reader, 2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(expected):
                raise ParseError(lineno, "<row>", ",".join(row))
            try:
                ts, off = parse_timestamp(row[0])
            except ValueError:
                raise ParseError(lineno, "timestamp", row[0]) from None
            oat = _number(row[1], lineno, "oat")
            energy = _number(row[2], lineno, "energy")
            zones = []
            for j in range(zone_count):
                base = 3 + 3 * j
                vals = [_number(row[base + k], lineno, expected[base + k]) for k in range(3)]
                zones.append(ZoneSample(*vals))
            records.append(HourlyRecord(ts, oat, energy, tuple(zones), off))
    if not records:
        raise EmptyFile(f"{path}: no data rows")
    records.sort(key=lambda r: r.timestamp)
    return ControllerDataset(label or path.stem, zone_count, tuple(records), min_records)


def write_dataset_csv(d: ControllerDataset, path) -> None:
    """Write ``d`` in the ingest schema; floats use repr so re-parsing is exact."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(dataset_header(d.zone_count))
        for r in d.records:
            row = [format_timestamp(r.timestamp, r.utc_offset), repr(r.oat), repr(r.energy)]
            for z in r.zones:
                row += [repr(z.temp), repr(z.setpoint), repr(z.band)]
            w.writerow(row)
    os.replace(tmp, path)
