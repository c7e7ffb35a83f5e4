#!/usr/bin/env python
"""Why the resampling uses blocks.

Hourly residuals are autocorrelated.  Resampling single hours destroys that
structure and makes the bootstrap overconfident; resampling blocks keeps most
of it.
"""
import numpy as np
from scipy.signal import lfilter

from hvac_compare.infer import moving_block_resample, replicate_rng
from hvac_compare.ingest import resolve_block_length


def lag1(x):
    x = x - x.mean()
    return x[:-1] @ x[1:] / (x @ x)


x = lfilter([1.0], [1.0, -0.8], np.random.default_rng(0).standard_normal(1000))
print(f"source series: N={len(x)}, lag-1 autocorrelation {lag1(x):.3f}")
print(f"automatic block length for N=1000: {resolve_block_length('auto', 1000)}\n")

print(" block   mean lag-1   sd of resampled mean")
for l in (1, 2, 5, 10, 25, 50):
    reps = [moving_block_resample(x, l, replicate_rng(0, l, b)) for b in range(400)]
    print(f"  {l:4d}   {np.mean([lag1(r) for r in reps]):10.3f}   "
          f"{np.std([r.mean() for r in reps]):10.4f}")

# For AR(1) with phi=0.8 the long-run sd of the mean is sqrt((1+phi)/(1-phi)) = 3
# times the naive sd.
print(f"\nnaive iid sd of the mean       {x.std() / np.sqrt(len(x)):.4f}")
print(f"AR(1) long-run sd of the mean  {3 * x.std() / np.sqrt(len(x)):.4f}")
