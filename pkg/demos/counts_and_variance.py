"""Other models: Poisson counts, a change in variance, a change in slope."""

import numpy as np

from singlecp import (
    anscombe_transform,
    lr_mean_and_variance,
    lr_mean_known_var,
    lr_poisson,
    lr_slope,
    lr_variance_known_mean,
)
from singlecp.noise import IidGauss, PiecewiseConstant, PiecewiseLinear, PoissonCounts, gen_series

# low-rate counts: the Poisson statistic against a Gaussian test on transformed data
counts = gen_series(PiecewiseConstant(1000, (500,), (0.05, 0.2)), PoissonCounts(), seed=4)
p = lr_poisson(counts)
g = lr_mean_known_var(anscombe_transform(counts))
print(f"Poisson LR max {p.max():.1f} at {p.argmax()}; Anscombe-Gaussian max {g.max():.1f} at {g.argmax()}")

# variance doubles half way, mean stays at 0
rng = np.random.default_rng(5)
x = np.r_[rng.normal(0, 1, 400), rng.normal(0, 2, 400)]
v = lr_variance_known_mean(x, mu=0.0)
mv = lr_mean_and_variance(x, minseg=10)
print(f"variance change: known-mean LR peaks at {v.argmax()}, mean-and-variance LR at {mv.argmax()}")

# a kink in a trend
trend = gen_series(PiecewiseLinear(600, 0.0, 0.01, ((350, 0.02),)), IidGauss(1.0), seed=6)
s = lr_slope(trend, sigma=1.0)
print(f"slope change: LR {s.max():.1f} at tau={s.argmax()}")
