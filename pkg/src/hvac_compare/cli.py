"""Command line entry point.

    hvac-compare compare d1.csv d2.csv --config cfg.txt --out results/ [--seed S] [--zones Z]
    hvac-compare synth spec.txt --out data.csv
    hvac-compare mc spec1.txt spec2.txt --config cfg.txt --trials 200

Exit codes: 0 success, 2 input or data error, 3 statistical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import ingest
from .errors import DataError, HvacCompareError, StatisticalError
from .ingest import AnalysisConfig, apply_seed_env, parse_config, parse_dataset_csv
from .pipeline import compare_datasets
from .report import write_report_files
from .synth import (generate_dataset, monte_carlo_study, read_spec, write_truth)

EXIT_OK = 0
EXIT_DATA = 2
EXIT_STATS = 3

log = logging.getLogger("hvac_compare")


def _load_config(path, seed=None, workers=None) -> AnalysisConfig:
    cfg = parse_config(path) if path else apply_seed_env(AnalysisConfig())
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if workers is not None:
        cfg = replace(cfg, workers=workers)
    return cfg


def cmd_compare(args) -> int:
    cfg = _load_config(args.config, args.seed, args.workers)
    d1 = parse_dataset_csv(args.dataset1, args.zones, label=Path(args.dataset1).stem,
                           min_records=cfg.min_records)
    d2 = parse_dataset_csv(args.dataset2, args.zones, label=Path(args.dataset2).stem,
                           min_records=cfg.min_records)
    report = compare_datasets(d1, d2, cfg)
    written = write_report_files(report, d1, d2, args.out)
    for t in report.tests:
        print(f"{t.name:<28} statistic={t.statistic:.6g} p_raw={t.p_raw:.4g} "
              f"p_adj={t.p_adjusted:.4g} {'significant' if t.significant else 'not significant'}")
    for m in (report.energy, report.comfort):
        if m.interval is not None:
            iv = m.interval
            print(f"{m.kind} daily difference {iv.estimate:.6g}, {100 * iv.level:g}% CI "
                  f"[{iv.lower:.6g}, {iv.upper:.6g}]")
    for w in report.warnings:
        log.warning(w)
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = read_spec(args.spec)
    d, truth = generate_dataset(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    ingest.write_dataset_csv(d, out)
    support = (float(d.oat.min()), float(d.oat.max()))
    write_truth(truth, out.with_name(out.name + ".truth.json"), support)
    print(f"wrote {d.N} rows to {out}")
    return EXIT_OK


def cmd_mc(args) -> int:
    spec1, spec2 = read_spec(args.spec1), read_spec(args.spec2)
    cfg = _load_config(args.config, args.seed, args.workers)
    try:
        summary = monte_carlo_study(spec1, spec2, cfg, args.trials,
                                    intervals=not args.no_intervals)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    print(summary.table())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hvac-compare",
                                description="Compare energy use and comfort of two HVAC controllers.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compare", help="compare two controller datasets")
    c.add_argument("dataset1")
    c.add_argument("dataset2")
    c.add_argument("--config", help="key = value config file (defaults if omitted)")
    c.add_argument("--out", required=True, help="output directory")
    c.add_argument("--seed", type=int, help="overrides config and environment seed")
    c.add_argument("--zones", type=int, help="zone count (inferred from header if omitted)")
    c.add_argument("--workers", type=int, help="bootstrap worker threads")
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("synth", help="generate a synthetic dataset")
    s.add_argument("spec", help="key = value synthetic spec file (may be empty)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    m = sub.add_parser("mc", help="Monte Carlo size/power/coverage study")
    m.add_argument("spec1")
    m.add_argument("spec2")
    m.add_argument("--config")
    m.add_argument("--trials", type=int, required=True)
    m.add_argument("--seed", type=int)
    m.add_argument("--workers", type=int)
    m.add_argument("--no-intervals", action="store_true")
    m.set_defaults(func=cmd_mc)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except StatisticalError as exc:
        print(f"error [{exc.module}]: {exc}", file=sys.stderr)
        return EXIT_STATS
    except HvacCompareError as exc:
        print(f"error [{exc.module}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        print(f"error [input]: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
