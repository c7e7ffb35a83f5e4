"""End-to-end comparison of two controller datasets."""
from __future__ import annotations

from dataclasses import replace
from typing import Literal

import numpy as np

from .aggregate import make_distribution
from .comfort import comfort_series
from .datamodel import (ComparisonReport, ControllerDataset, MetricComparison,
                        check_comparability, validate_dataset)
from .errors import InvalidDataset
from .infer import (PairFit, _stream, bias_corrected_interval, bonferroni_adjust, fit_pair,
                    interval_replicates, null_distribution, tests_from_null)
from .ingest import AnalysisConfig
from .smooth import ScatterData


def scatter(d: ControllerDataset, kind: str) -> ScatterData:
    if kind == "energy":
        return ScatterData(d.oat, d.energy)
    return ScatterData(d.oat, comfort_series(d).values)


def _adjust(tests, family):
    """Bonferroni within each metric (m=2) or across all four tests (m=4)."""
    if family == "all":
        adjusted = bonferroni_adjust([t.p_raw for t in tests])
        return [t.with_adjusted(p) for t, p in zip(tests, adjusted)]
    out = []
    for pair in (tests[:2], tests[2:]):
        adjusted = bonferroni_adjust([t.p_raw for t in pair])
        out += [t.with_adjusted(p) for t, p in zip(pair, adjusted)]
    return out


def compare_datasets(d1: ControllerDataset, d2: ControllerDataset, cfg: AnalysisConfig,
                     intervals: Literal["significant", "always", "never"] = "significant"
                     ) -> ComparisonReport:
    """Validate, fit, test and (when warranted) bound both metrics.

    ``intervals="significant"`` computes a confidence interval only for daily
    differences whose adjusted p-value falls below ``cfg.alpha``.
    """
    for d in (d1, d2):
        if d.min_records != cfg.min_records:
            d = replace(d, min_records=cfg.min_records)
        violations = validate_dataset(d)
        if violations:
            raise InvalidDataset(d.label, violations)
    comp = check_comparability(d1, d2, min_overlap=cfg.min_overlap)
    dist = make_distribution(cfg.oat_distribution, (d1, d2), comp.support)
    warnings = list(comp.warnings)

    pairs: dict[str, PairFit] = {}
    tests = []
    for kind in ("energy", "comfort"):
        pair = fit_pair(scatter(d1, kind), scatter(d2, kind), cfg, dist, kind)
        pairs[kind] = pair
        null = null_distribution(pair, cfg, _stream(kind))
        tests += tests_from_null(pair, null, cfg)
        for k, c in enumerate(pair.curves, 1):
            if c.fallback_points:
                warnings.append(f"{kind} curve {k}: weighted-mean fallback at "
                                f"{len(c.fallback_points)} grid points")
            if c.widened_points:
                warnings.append(f"{kind} curve {k}: bandwidth widened at "
                                f"{len(c.widened_points)} grid points")
    tests = _adjust(tests, cfg.bonferroni_family)

    metrics = {}
    for i, kind in enumerate(("energy", "comfort")):
        pair = pairs[kind]
        curve_test, daily_test = tests[2 * i], tests[2 * i + 1]
        interval = None
        if intervals == "always" or (intervals == "significant" and daily_test.significant):
            boot = interval_replicates(pair, cfg, _stream(kind, ci=True))
            interval = bias_corrected_interval(boot, pair.daily_difference, cfg.beta)
            warnings += [f"{kind} interval: {w}" for w in interval.warnings]
        day1, day2 = pair.daily
        metrics[kind] = MetricComparison(kind, pair.curves[0], pair.curves[1], day1, day2,
                                         curve_test, daily_test, interval)

    return ComparisonReport(
        config=cfg.as_dict(), seed=cfg.seed, labels=(d1.label, d2.label),
        support=comp.support, energy=metrics["energy"], comfort=metrics["comfort"],
        warnings=tuple(warnings),
    )
