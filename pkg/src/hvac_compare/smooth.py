"""Local linear kernel regression for characteristic curves.

The fit at temperature ``t`` is the intercept of a weighted least-squares line
``y ~ b0 + b1 (x - t)`` with Epanechnikov weights ``0.75 (1 - u^2)``, ``u =
(x - t) / h``.  Where fewer than ``MIN_POINTS`` observations fall inside the
window the bandwidth is doubled locally, at most ``MAX_DOUBLINGS`` times.

Because the estimator is linear in ``y`` for a fixed design and bandwidth,
:func:`smoother_matrix` exposes it as a matrix; the bootstrap relies on this to
refit thousands of replicate curves with a single matrix product.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .datamodel import CharacteristicCurve
from .errors import BandwidthFailure, DegenerateNeighborhood, FitFailure

MIN_POINTS = 5
MAX_DOUBLINGS = 6
MIN_DISTINCT_X = 10
N_CANDIDATES = 20
MIN_CANDIDATE = 0.5
# Relative tolerance on det(X'WX) below which the in-window x are treated as
# coincident and the fit falls back to a weighted mean.
SINGULAR_RTOL = 1e-12

STATUS_OK = 0
STATUS_FALLBACK = 1
STATUS_DEGENERATE = 2


@dataclass(frozen=True)
class ScatterData:
    """Paired (OAT, response) observations."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError(f"x and y must be 1-d of equal length, got {x.shape} and {y.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.x)

    @property
    def distinct_x(self) -> int:
        return len(np.unique(self.x))

    @property
    def support(self) -> tuple[float, float]:
        return float(self.x.min()), float(self.x.max())


# -- numba kernels -----------------------------------------------------------

@njit(cache=True)
def _window(xs, t, h):
    # Open window (t - h, t + h): points on the boundary get zero weight.
    lo = np.searchsorted(xs, t - h, side="right")
    hi = np.searchsorted(xs, t + h, side="left")
    return lo, hi


@njit(cache=True)
def _resolve_bandwidth(xs, t, h, skip, min_points, max_doublings):
    hk = h
    for _ in range(max_doublings + 1):
        lo, hi = _window(xs, t, hk)
        count = hi - lo
        if lo <= skip < hi:
            count -= 1
        if count >= min_points:
            return hk, lo, hi, count
        hk *= 2.0
    hk /= 2.0
    lo, hi = _window(xs, t, hk)
    count = hi - lo
    if lo <= skip < hi:
        count -= 1
    return hk, lo, hi, count


@njit(cache=True)
def _moments(xs, ys, t, hk, lo, hi, skip):
    s0 = 0.0
    s1 = 0.0
    s2 = 0.0
    t0 = 0.0
    t1 = 0.0
    for j in range(lo, hi):
        if j == skip:
            continue
        d = xs[j] - t
        u = d / hk
        w = 0.75 * (1.0 - u * u)
        s0 += w
        s1 += w * d
        s2 += w * d * d
        t0 += w * ys[j]
        t1 += w * d * ys[j]
    return s0, s1, s2, t0, t1


@njit(cache=True)
def _fit_values(xs, ys, ts, h, skips, min_points, max_doublings, rtol):
    n_eval = ts.shape[0]
    values = np.empty(n_eval)
    status = np.zeros(n_eval, dtype=np.int64)
    used_h = np.empty(n_eval)
    for k in range(n_eval):
        t = ts[k]
        skip = skips[k]
        hk, lo, hi, count = _resolve_bandwidth(xs, t, h, skip, min_points, max_doublings)
        used_h[k] = hk
        if count < min_points:
            values[k] = np.nan
            status[k] = STATUS_DEGENERATE
            continue
        s0, s1, s2, t0, t1 = _moments(xs, ys, t, hk, lo, hi, skip)
        det = s0 * s2 - s1 * s1
        if s2 <= 0.0 or det <= rtol * s0 * s2:
            values[k] = t0 / s0
            status[k] = STATUS_FALLBACK
        else:
            values[k] = (s2 * t0 - s1 * t1) / det
    return values, status, used_h


@njit(cache=True)
def _weight_rows(xs, ts, h, min_points, max_doublings, rtol):
    n_eval = ts.shape[0]
    n = xs.shape[0]
    rows = np.zeros((n_eval, n))
    status = np.zeros(n_eval, dtype=np.int64)
    used_h = np.empty(n_eval)
    dummy = np.zeros(n)
    for k in range(n_eval):
        t = ts[k]
        hk, lo, hi, count = _resolve_bandwidth(xs, t, h, -1, min_points, max_doublings)
        used_h[k] = hk
        if count < min_points:
            status[k] = STATUS_DEGENERATE
            rows[k, :] = np.nan
            continue
        s0, s1, s2, _, _ = _moments(xs, dummy, t, hk, lo, hi, -1)
        det = s0 * s2 - s1 * s1
        fallback = s2 <= 0.0 or det <= rtol * s0 * s2
        if fallback:
            status[k] = STATUS_FALLBACK
        for j in range(lo, hi):
            d = xs[j] - t
            u = d / hk
            w = 0.75 * (1.0 - u * u)
            if fallback:
                rows[k, j] = w / s0
            else:
                rows[k, j] = w * (s2 - s1 * d) / det
    return rows, status, used_h


# -- public API --------------------------------------------------------------

def _sorted(x, y=None):
    order = np.argsort(x, kind="stable")
    xs = np.ascontiguousarray(x[order])
    if y is None:
        return order, xs
    return order, xs, np.ascontiguousarray(y[order])


def local_linear_fit(data: ScatterData, t: float, h: float) -> float:
    """Local linear estimate at a single temperature ``t``.

    Raises
    ------
    DegenerateNeighborhood
        Fewer than five points remain in the window after widening.
    """
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    lo, hi = data.support
    if not lo <= t <= hi:
        raise ValueError(f"t={t} outside data support [{lo}, {hi}]")
    _, xs, ys = _sorted(data.x, data.y)
    values, status, used_h = _fit_values(xs, ys, np.array([float(t)]), float(h),
                                         np.array([-1]), MIN_POINTS, MAX_DOUBLINGS,
                                         SINGULAR_RTOL)
    if status[0] == STATUS_DEGENERATE:
        raise DegenerateNeighborhood(t, used_h[0], _count_in_window(xs, t, used_h[0]))
    if status[0] == STATUS_FALLBACK:
        warnings.warn(f"singular local fit at t={t:g}; using weighted mean", stacklevel=2)
    return float(values[0])


def _count_in_window(xs, t, h):
    lo, hi = _window(xs, float(t), float(h))
    return int(hi - lo)


def evaluate(data: ScatterData, ts, h: float):
    """Direct evaluation at many points; returns (values, status, used bandwidth)."""
    _, xs, ys = _sorted(data.x, data.y)
    ts = np.ascontiguousarray(np.asarray(ts, dtype=float))
    skips = np.full(ts.shape, -1, dtype=np.int64)
    return _fit_values(xs, ys, ts, float(h), skips, MIN_POINTS, MAX_DOUBLINGS, SINGULAR_RTOL)


def smoother_matrix(x, ts, h: float):
    """Matrix ``L`` with ``L @ y`` equal to the local linear fit at ``ts``.

    Columns follow the original order of ``x``.  Returns ``(L, status,
    used_h)``; rows whose neighborhood stays degenerate are NaN.
    """
    x = np.asarray(x, dtype=float)
    order, xs = _sorted(x)
    ts = np.ascontiguousarray(np.asarray(ts, dtype=float))
    rows, status, used_h = _weight_rows(xs, ts, float(h), MIN_POINTS, MAX_DOUBLINGS,
                                        SINGULAR_RTOL)
    L = np.empty_like(rows)
    L[:, order] = rows
    return L, status, used_h


def loo_cv_score(data: ScatterData, h: float) -> float:
    """Mean squared leave-one-out prediction error; inf if any fit is degenerate."""
    _, xs, ys = _sorted(data.x, data.y)
    skips = np.arange(len(xs), dtype=np.int64)
    pred, status, _ = _fit_values(xs, ys, xs, float(h), skips, MIN_POINTS, MAX_DOUBLINGS,
                                  SINGULAR_RTOL)
    if np.any(status == STATUS_DEGENERATE):
        return np.inf
    return float(np.mean((ys - pred) ** 2))


def bandwidth_candidates(x) -> np.ndarray:
    hi = 0.5 * float(np.ptp(x))
    lo = min(MIN_CANDIDATE, hi)
    return np.geomspace(lo, hi, N_CANDIDATES)


def select_bandwidth(*datasets: ScatterData) -> float:
    """Leave-one-out cross-validated bandwidth.

    With several datasets (one per controller) the criterion is the total
    squared LOO error over all of them, which yields one common bandwidth.
    Candidates form a geometric grid from 0.5 F to half the pooled OAT range;
    ties go to the larger bandwidth.
    """
    if not datasets:
        raise ValueError("need at least one dataset")
    for d in datasets:
        if d.distinct_x < MIN_DISTINCT_X:
            raise ValueError(f"need at least {MIN_DISTINCT_X} distinct x values, "
                             f"got {d.distinct_x}")
    pooled_x = np.concatenate([d.x for d in datasets])
    pooled_y = np.concatenate([d.y for d in datasets])
    candidates = bandwidth_candidates(pooled_x)
    total = sum(len(d) for d in datasets)
    scores = np.array([
        sum(loo_cv_score(d, h) * len(d) for d in datasets) / total for h in candidates
    ])
    if not np.any(np.isfinite(scores)):
        raise BandwidthFailure("every candidate bandwidth gives degenerate fits")
    best = scores[np.isfinite(scores)].min()
    tol = 1e-10 * float(np.var(pooled_y)) + 1e-300
    tied = np.flatnonzero(scores <= best + tol)
    return float(candidates[tied.max()])


def finish_values(values, kind):
    """Clip comfort curves at zero; local linear fits can dip below it near a kink."""
    if kind == "comfort":
        return np.maximum(values, 0.0)
    return values


def curve_grid(support, grid_points: int) -> np.ndarray:
    lo, hi = support
    grid = np.linspace(lo, hi, grid_points)
    grid[0], grid[-1] = lo, hi
    return grid


def fit_characteristic(data: ScatterData, cfg, support, kind: str = "energy",
                       bandwidth: Optional[float] = None) -> CharacteristicCurve:
    """Fit a characteristic curve on a uniform grid over ``support``.

    ``bandwidth`` overrides ``cfg.bandwidth``; with neither set the bandwidth
    is chosen by :func:`select_bandwidth`.
    """
    curve, _ = fit_with_matrix(data, cfg, support, kind, bandwidth)
    return curve


def fit_with_matrix(data: ScatterData, cfg, support, kind="energy", bandwidth=None):
    """Like :func:`fit_characteristic` but also returns the smoother matrix."""
    lo, hi = data.support
    if support[0] < lo or support[1] > hi or support[0] >= support[1]:
        raise ValueError(f"support {support} not inside data range [{lo}, {hi}]")
    if data.distinct_x < MIN_DISTINCT_X:
        raise ValueError(f"need at least {MIN_DISTINCT_X} distinct x values")
    h = bandwidth
    if h is None:
        h = select_bandwidth(data) if cfg.bandwidth == "auto" else float(cfg.bandwidth)
    grid = curve_grid(support, cfg.grid_points)
    L, status, used_h = smoother_matrix(data.x, grid, h)
    bad = np.flatnonzero(status == STATUS_DEGENERATE)
    if bad.size:
        k = int(bad[0])
        raise FitFailure(f"{kind} curve: degenerate neighborhood at grid point {k} "
                         f"(t={grid[k]:.3f} F, bandwidth {used_h[k]:.3g} F)")
    values = finish_values(L @ data.y, kind)
    curve = CharacteristicCurve(
        grid=grid,
        values=values,
        bandwidth=float(h),
        support=(float(support[0]), float(support[1])),
        kind=kind,
        fallback_points=tuple(int(i) for i in np.flatnonzero(status == STATUS_FALLBACK)),
        widened_points=tuple(int(i) for i in np.flatnonzero(used_h > h)),
    )
    return curve, L
