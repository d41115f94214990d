"""How the threshold rules compare as the series gets longer.

Monte Carlo thresholds grow slowly with n.  The Gumbel limit and the
Bonferroni bound are conservative, and 2 log n ignores the level entirely.
"""

from singlecp.calibration import bonferroni_threshold, gumbel_threshold, mc_null_quantile, two_log_n
from singlecp.models import GaussMeanAndVar, GaussMeanKnownVar

print(f"{'n':>6} {'alpha':>6} {'MC':>7} {'Gumbel':>7} {'Bonf':>7} {'2logn':>7}")
for n in (100, 1000, 5000):
    for alpha in (0.05, 0.01):
        mc = mc_null_quantile(GaussMeanKnownVar(), n, alpha=alpha, B=4000, seed=3)
        print(
            f"{n:>6} {alpha:>6} {mc:7.2f} {gumbel_threshold(n, alpha)[1]:7.2f} "
            f"{bonferroni_threshold(n, alpha):7.2f} {two_log_n(n):7.2f}"
        )

# a minimum segment length lowers the threshold for the mean-and-variance test
for minseg in (2, 10, 50):
    c = mc_null_quantile(GaussMeanAndVar(), 1000, minseg, 0.05, B=4000, seed=3)
    print(f"mean-and-variance, n=1000, minseg={minseg}: {c:.2f}")
