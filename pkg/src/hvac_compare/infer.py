"""Moving block bootstrap inference for pairs of characteristic curves.

Null replicates keep each controller's OAT design fixed.  A pooled curve is
fitted to both scatters together, each controller's residuals around it are
block-resampled in time order, and both curves are refitted to
``pooled(x_k) + e*_k``.  Interval replicates do the same around each
controller's own curve instead of the pooled one.

The bandwidth is chosen once on the observed data and frozen, so every
refit is the fixed smoother matrix applied to the replicate responses.

Randomness for replicate ``b`` of stream ``s`` comes from
``SeedSequence(seed, spawn_key=(s, b))``.  Replicates are processed in fixed
chunks and reassembled by index, so results do not depend on how many
worker threads run them.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm

from .aggregate import OatDistribution, daily_weights, pooled_distribution
from .datamodel import CharacteristicCurve, IntervalEstimate, TestResult
from .errors import DegenerateBootstrap, FitFailure, TestFailure
from .ingest import AnalysisConfig, resolve_block_length
from .smooth import (STATUS_DEGENERATE, ScatterData, curve_grid, evaluate, finish_values,
                     select_bandwidth, smoother_matrix)

MAX_DISCARD_FRACTION = 0.05
CHUNK = 64

# Seed streams: one per use so that the four bootstrap runs of a comparison
# never share random numbers.
STREAM_ENERGY_NULL = 1
STREAM_COMFORT_NULL = 2
STREAM_ENERGY_CI = 3
STREAM_COMFORT_CI = 4


def replicate_rng(seed: int, stream: int, replicate: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(replicate)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class BlockResamplePlan:
    n: int
    block_length: int

    def __post_init__(self):
        if not 1 <= self.block_length <= self.n:
            raise ValueError(f"block length {self.block_length} not in [1, {self.n}]")

    @property
    def n_blocks(self) -> int:
        return -(-self.n // self.block_length)

    def indices(self, rng: np.random.Generator) -> np.ndarray:
        starts = rng.integers(0, self.n - self.block_length + 1, size=self.n_blocks)
        idx = starts[:, None] + np.arange(self.block_length)
        return idx.ravel()[: self.n]


def moving_block_resample(series, l: int, rng: np.random.Generator) -> np.ndarray:
    """Concatenate ``ceil(N/l)`` randomly placed blocks of length ``l``, cut to N."""
    series = np.asarray(series)
    return series[BlockResamplePlan(len(series), int(l)).indices(rng)]


def bonferroni_adjust(p: Sequence[float]) -> list[float]:
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p > 1)):
        raise ValueError("p-values must lie in (0, 1]")
    return [float(v) for v in np.minimum(1.0, len(p) * p)]


def curve_distance(c1, c2) -> np.ndarray:
    """Grid mean of squared differences; works along the last axis."""
    return np.mean((np.asarray(c1) - np.asarray(c2)) ** 2, axis=-1)


@dataclass(frozen=True)
class PairFit:
    """Observed curves of both controllers plus what refitting needs."""

    kind: str
    data: tuple[ScatterData, ScatterData]
    curves: tuple[CharacteristicCurve, CharacteristicCurve]
    matrices: tuple[np.ndarray, np.ndarray]
    daily_weights: np.ndarray
    bandwidth: float
    block_lengths: tuple[int, int]

    @property
    def daily(self) -> tuple[float, float]:
        return tuple(float(self.daily_weights @ c.values) for c in self.curves)

    @property
    def daily_difference(self) -> float:
        d1, d2 = self.daily
        return d2 - d1

    @property
    def distance(self) -> float:
        return float(curve_distance(self.curves[0].values, self.curves[1].values))


def fit_pair(d1: ScatterData, d2: ScatterData, cfg: AnalysisConfig, dist: OatDistribution,
             kind: str = "energy", bandwidth: Optional[float] = None) -> PairFit:
    """Fit both curves on a shared grid over ``dist.support`` with one bandwidth."""
    if not isinstance(dist, OatDistribution):
        dist = pooled_distribution(dist)
    support = dist.support
    if bandwidth is None:
        bandwidth = (select_bandwidth(d1, d2) if cfg.bandwidth == "auto"
                     else float(cfg.bandwidth))
    grid = curve_grid(support, cfg.grid_points)
    curves, mats = [], []
    for d in (d1, d2):
        L, status, used_h = smoother_matrix(d.x, grid, bandwidth)
        bad = np.flatnonzero(status == STATUS_DEGENERATE)
        if bad.size:
            raise FitFailure(f"{kind} curve: degenerate neighborhood at grid point "
                             f"{int(bad[0])} (t={grid[bad[0]]:.3f} F)")
        curves.append(CharacteristicCurve(
            grid=grid, values=finish_values(L @ d.y, kind), bandwidth=float(bandwidth),
            support=(float(support[0]), float(support[1])), kind=kind,
            fallback_points=tuple(int(i) for i in np.flatnonzero(status == 1)),
            widened_points=tuple(int(i) for i in np.flatnonzero(used_h > bandwidth)),
        ))
        mats.append(L)
    blocks = (resolve_block_length(cfg.block_length, len(d1)),
              resolve_block_length(cfg.block_length, len(d2)))
    return PairFit(kind, (d1, d2), tuple(curves), tuple(mats),
                   daily_weights(grid, dist), float(bandwidth), blocks)


def _fitted(data: ScatterData, at: np.ndarray, h: float, what: str) -> np.ndarray:
    values, status, _ = evaluate(data, at, h)
    if np.any(status == STATUS_DEGENERATE):
        raise FitFailure(f"{what}: degenerate neighborhood while computing residuals")
    return values


def null_model(pair: PairFit):
    """Pooled-curve fitted values and centred residuals for each controller.

    Centring matters under the alternative: a level shift between the
    controllers would otherwise survive in each residual mean and follow
    every replicate, pulling the null distribution towards the observed
    difference.
    """
    d1, d2 = pair.data
    pooled = ScatterData(np.concatenate([d1.x, d2.x]), np.concatenate([d1.y, d2.y]))
    bases, resid = [], []
    for d in (d1, d2):
        base = _fitted(pooled, d.x, pair.bandwidth, f"pooled {pair.kind} curve")
        e = d.y - base
        bases.append(base)
        resid.append(e - e.mean())
    return tuple(bases), tuple(resid)


def alternative_model(pair: PairFit):
    """Each controller's own fitted values and residuals."""
    bases, resid = [], []
    for k, d in enumerate(pair.data):
        base = _fitted(d, d.x, pair.bandwidth, f"controller {k + 1} {pair.kind} curve")
        e = d.y - base
        bases.append(base)
        resid.append(e - e.mean())
    return tuple(bases), tuple(resid)


def bootstrap_curves(pair: PairFit, bases, residuals, seed: int, stream: int,
                     replicates: int, workers: int = 1):
    """Refit both curves on ``replicates`` block-resampled responses.

    Returns two ``(replicates, grid_points)`` arrays.
    """
    plans = [BlockResamplePlan(len(r), l) for r, l in zip(residuals, pair.block_lengths)]
    kind = pair.kind

    def run_chunk(start):
        stop = min(start + CHUNK, replicates)
        ys = [np.empty((len(r), stop - start)) for r in residuals]
        for col, b in enumerate(range(start, stop)):
            rng = replicate_rng(seed, stream, b)
            for k in range(2):
                ys[k][:, col] = bases[k] + residuals[k][plans[k].indices(rng)]
        return start, [finish_values((pair.matrices[k] @ ys[k]).T, kind) for k in range(2)]

    out = [np.empty((replicates, len(pair.curves[0].grid))) for _ in range(2)]
    starts = range(0, replicates, CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_chunk, starts))
    else:
        results = [run_chunk(s) for s in starts]
    for start, curves in results:
        for k in range(2):
            out[k][start:start + len(curves[k])] = curves[k]
    return out[0], out[1]


@dataclass(frozen=True)
class NullDistribution:
    distance: np.ndarray
    daily_difference: np.ndarray
    discarded: int


def null_distribution(pair: PairFit, cfg: AnalysisConfig, stream: int) -> NullDistribution:
    bases, resid = null_model(pair)
    c1, c2 = bootstrap_curves(pair, bases, resid, cfg.seed, stream, cfg.replicates,
                              cfg.workers)
    dist = curve_distance(c1, c2)
    diff = c2 @ pair.daily_weights - c1 @ pair.daily_weights
    ok = np.isfinite(dist) & np.isfinite(diff)
    discarded = int((~ok).sum())
    if discarded > MAX_DISCARD_FRACTION * cfg.replicates:
        raise TestFailure(f"{pair.kind}: {discarded} of {cfg.replicates} bootstrap "
                          "replicates failed")
    return NullDistribution(dist[ok], diff[ok], discarded)


def p_upper(observed: float, replicates: np.ndarray) -> float:
    return (1 + int(np.count_nonzero(replicates >= observed))) / (len(replicates) + 1)


def p_two_sided(observed: float, replicates: np.ndarray) -> float:
    return (1 + int(np.count_nonzero(np.abs(replicates) >= abs(observed)))) / (len(replicates) + 1)


def _result(name, statistic, p, pair, null, cfg):
    return TestResult(name=name, statistic=float(statistic), p_raw=p, p_adjusted=p,
                      replicates=len(null.distance), block_length=pair.block_lengths,
                      alpha=cfg.alpha, significant=p < cfg.alpha, discarded=null.discarded)


def tests_from_null(pair: PairFit, null: NullDistribution, cfg: AnalysisConfig):
    """(curve-equality, daily-difference) results with unadjusted p-values."""
    t_obs = pair.distance
    d_obs = pair.daily_difference
    curve = _result(f"{pair.kind} curve equality", t_obs, p_upper(t_obs, null.distance),
                    pair, null, cfg)
    daily = _result(f"{pair.kind} daily difference", d_obs,
                    p_two_sided(d_obs, null.daily_difference), pair, null, cfg)
    return curve, daily


def _stream(kind, ci=False):
    if kind == "energy":
        return STREAM_ENERGY_CI if ci else STREAM_ENERGY_NULL
    return STREAM_COMFORT_CI if ci else STREAM_COMFORT_NULL


def curve_equality_test(d1: ScatterData, d2: ScatterData, cfg: AnalysisConfig,
                        dist: OatDistribution, kind: str = "energy",
                        pair: Optional[PairFit] = None) -> TestResult:
    """Test whether the two characteristic curves are equal on the common support.

    ``dist`` supplies the common support (and the daily weights the shared
    null run also uses).  Pass a precomputed ``pair`` to skip refitting.
    """
    pair = pair or fit_pair(d1, d2, cfg, dist, kind)
    null = null_distribution(pair, cfg, _stream(kind))
    return tests_from_null(pair, null, cfg)[0]


def daily_difference_test(d1: ScatterData, d2: ScatterData, cfg: AnalysisConfig,
                          dist: OatDistribution, kind: str = "energy",
                          pair: Optional[PairFit] = None) -> TestResult:
    """Two-sided test of controller 2 minus controller 1 daily total being zero.

    Uses the same null replicates as :func:`curve_equality_test`.
    """
    pair = pair or fit_pair(d1, d2, cfg, dist, kind)
    null = null_distribution(pair, cfg, _stream(kind))
    return tests_from_null(pair, null, cfg)[1]


def bias_corrected_interval(boot, estimate: float, level: float) -> IntervalEstimate:
    """Bias-corrected percentile interval from bootstrap replicates.

    With ``z0 = Phi^-1(#{boot < estimate} / B)`` the endpoints are the
    empirical quantiles of ``boot`` at ``Phi(2 z0 -+ z)``, ``z =
    Phi^-1((1 + level) / 2)``.  When ``z0`` would be infinite the plain
    percentile interval is returned with a warning instead.
    """
    boot = np.asarray(boot, dtype=float)
    B = len(boot)
    # Spread at rounding-error level counts as identical.
    if B == 0 or np.ptp(boot) <= 1e-9 * np.abs(boot).max():
        raise DegenerateBootstrap("all bootstrap replicates are identical")
    z = norm.ppf((1 + level) / 2)
    below = int(np.count_nonzero(boot < estimate))
    warnings = ()
    if 0 < below < B:
        z0 = float(norm.ppf(below / B))
        q = norm.cdf([2 * z0 - z, 2 * z0 + z])
    else:
        z0 = None
        q = np.array([(1 - level) / 2, (1 + level) / 2])
        warnings = (f"bias correction undefined ({below} of {B} replicates below the "
                    "estimate); using the plain percentile interval",)
    lower, upper = (float(v) for v in np.quantile(boot, q))
    return IntervalEstimate(
        estimate=float(estimate), level=level, lower=lower, upper=upper,
        method="bias-corrected percentile" if z0 is not None else "percentile",
        bias_z0=z0, estimate_outside=not lower <= estimate <= upper, warnings=warnings,
    )


def interval_replicates(pair: PairFit, cfg: AnalysisConfig, stream: int) -> np.ndarray:
    bases, resid = alternative_model(pair)
    c1, c2 = bootstrap_curves(pair, bases, resid, cfg.seed, stream, cfg.replicates,
                              cfg.workers)
    diff = c2 @ pair.daily_weights - c1 @ pair.daily_weights
    ok = np.isfinite(diff)
    if (~ok).sum() > MAX_DISCARD_FRACTION * cfg.replicates:
        raise TestFailure(f"{pair.kind}: too many failed interval replicates")
    return diff[ok]


def bc_confidence_interval(d1: ScatterData, d2: ScatterData, cfg: AnalysisConfig,
                           dist: OatDistribution, kind: str = "energy",
                           pair: Optional[PairFit] = None) -> IntervalEstimate:
    """Interval for the daily difference, bootstrapping around each own curve."""
    pair = pair or fit_pair(d1, d2, cfg, dist, kind)
    boot = interval_replicates(pair, cfg, _stream(kind, ci=True))
    return bias_corrected_interval(boot, pair.daily_difference, cfg.beta)
