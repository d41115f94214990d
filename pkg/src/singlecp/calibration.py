"""Detection thresholds and power calculations.

Three ways to pick the cutoff for ``max_tau LR_tau``:

* Monte Carlo quantiles of the statistic simulated under the null,
* the Gumbel limit for the maximum of the standardised CUSUM process,
* Bonferroni over the ``n - 1`` split points (exact, or the ``2 log n`` rule).

The Monte Carlo machinery (:func:`simulate`) is shared with the experiments.
Replicate ``r`` always draws from its own generator seeded by
``(seed, stream, r)``, so output is bit-identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import special

from ._rng import default_workers, replicate_rng
from .core import ConfigurationError
from .models import (
    Ar1MeanKnown,
    GaussMeanAndVar,
    GaussMeanKnownVar,
    GaussMeanUnknownVar,
    GaussSlopeKnownVar,
    GaussVarKnownMean,
    PoissonMean,
    anscombe_transform,
    batch_lr,
)
from .noise import Ar1Noise, IidGauss, PiecewiseConstant, PoissonCounts, sample_series

__all__ = [
    "MonteCarlo",
    "GumbelAsymptotic",
    "BonferroniExact",
    "TwoLogN",
    "Fixed",
    "ThresholdRule",
    "PowerParams",
    "SeriesSampler",
    "MaxLr",
    "simulate",
    "null_sampler",
    "mc_null_max_lr",
    "mc_null_quantile",
    "empirical_quantile",
    "gumbel_threshold",
    "bonferroni_threshold",
    "two_log_n",
    "resolve_threshold",
    "noncentrality",
    "power_lower_bound",
    "chi2_1_sf",
    "normal_quantile",
]

DEFAULT_REPS = 10_000
# rows of simulated data held in memory at once, in float64 entries
CHUNK_CELLS = 2_000_000


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")


@dataclass(frozen=True)
class MonteCarlo:
    B: int = DEFAULT_REPS
    alpha: float = 0.05
    seed: int = 0
    null_mean: Optional[float] = None  # Poisson null rate

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.B < 100:
            raise ConfigurationError(f"B must be >= 100, got {self.B}")


@dataclass(frozen=True)
class GumbelAsymptotic:
    alpha: float = 0.05

    def __post_init__(self):
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class BonferroniExact:
    alpha: float = 0.05

    def __post_init__(self):
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class TwoLogN:
    pass


@dataclass(frozen=True)
class Fixed:
    c: float

    def __post_init__(self):
        if not self.c >= 0:
            raise ConfigurationError(f"threshold must be >= 0, got {self.c}")


ThresholdRule = Union[MonteCarlo, GumbelAsymptotic, BonferroniExact, TwoLogN, Fixed]


# -- Monte Carlo engine


@dataclass(frozen=True)
class SeriesSampler:
    """Draws one series per replicate from ``signal`` plus ``noise``.

    ``anscombe`` applies the variance-stabilising transform to the counts.
    """

    signal: object
    noise: object
    anscombe: bool = False

    def __call__(self, rng):
        x = sample_series(self.signal, self.noise, rng)
        if self.anscombe:
            x = anscombe_transform(x).values
        return x


@dataclass(frozen=True)
class MaxLr:
    """Statistic returning ``max_lr``, ``tau_hat`` and ``delta_hat`` per row."""

    model: object
    minseg: int = 1

    def __call__(self, X):
        taus, lr, _ = batch_lr(X, self.model, self.minseg)
        k = np.argmax(lr, axis=-1)
        tau_hat = taus[k]
        n = X.shape[-1]
        head = np.cumsum(X, axis=-1)
        s_tau = np.take_along_axis(head, (tau_hat - 1)[:, None], axis=-1)[:, 0]
        delta = (head[:, -1] - s_tau) / (n - tau_hat) - s_tau / tau_hat
        return {
            "max_lr": np.take_along_axis(lr, k[:, None], axis=-1)[:, 0],
            "tau_hat": tau_hat,
            "delta_hat": delta,
        }


def _run_chunk(sampler, statistic, seed, stream, start, stop):
    X = np.stack([sampler(replicate_rng(seed, r, stream)) for r in range(start, stop)])
    return statistic(X)


def simulate(sampler, statistic, B: int, seed: int, stream: int = 0, workers: Optional[int] = None):
    """Run ``statistic`` on ``B`` independently simulated series.

    ``sampler(rng)`` returns one series; ``statistic(X)`` maps a stack of
    series to a dict of per-row arrays.  Returns the concatenated dict.
    Both must be picklable when ``workers > 1``.
    """
    if B < 1:
        raise ConfigurationError(f"need at least one replicate, got {B}")
    workers = default_workers() if workers is None else workers
    n = np.asarray(sampler(replicate_rng(seed, 0, stream))).size
    chunk = max(1, min(B, CHUNK_CELLS // max(n, 1)))
    if workers > 1:
        # smaller chunks keep every worker busy
        chunk = max(1, min(chunk, math.ceil(B / (4 * workers))))
    bounds = [(a, min(a + chunk, B)) for a in range(0, B, chunk)]
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, sampler, statistic, seed, stream, a, b) for a, b in bounds]
            parts = [f.result() for f in futures]
    else:
        parts = [_run_chunk(sampler, statistic, seed, stream, a, b) for a, b in bounds]
    return {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}


def null_sampler(model, n: int, null_mean: Optional[float] = None) -> SeriesSampler:
    """Sampler for data with no change under ``model``'s own noise law."""
    if isinstance(model, PoissonMean):
        if null_mean is None or not null_mean > 0:
            raise ConfigurationError("the Poisson null needs a positive null_mean")
        return SeriesSampler(PiecewiseConstant(n, (), (null_mean,)), PoissonCounts())
    if isinstance(model, (GaussMeanKnownVar, GaussSlopeKnownVar)):
        return SeriesSampler(PiecewiseConstant(n), IidGauss(model.sigma))
    if isinstance(model, GaussVarKnownMean):
        return SeriesSampler(PiecewiseConstant(n, (), (model.mu,)), IidGauss(1.0))
    if isinstance(model, (GaussMeanUnknownVar, GaussMeanAndVar)):
        return SeriesSampler(PiecewiseConstant(n), IidGauss(1.0))
    if isinstance(model, Ar1MeanKnown):
        return SeriesSampler(PiecewiseConstant(n), Ar1Noise(model.phi, 1.0))
    raise ConfigurationError(f"no null sampler for {model!r}")


def mc_null_max_lr(model, n, minseg=1, B=DEFAULT_REPS, seed=0, *, null_mean=None, workers=None, stream=0):
    """Simulated null values of ``max_tau LR_tau`` (``+inf`` where degenerate)."""
    out = simulate(null_sampler(model, n, null_mean), MaxLr(model, minseg), B, seed, stream, workers)
    return out["max_lr"]


def empirical_quantile(samples, alpha: float) -> float:
    """The ``ceil(B(1-alpha))``-th order statistic, i.e. the conservative side."""
    samples = np.asarray(samples)
    B = samples.size
    target = B * (1.0 - alpha)
    if target < 1:
        raise ConfigurationError(f"B(1-alpha) = {target:g} < 1: too few replicates for alpha={alpha}")
    # guard against 0.95*10000 landing a hair above 9500
    k = math.ceil(target - 1e-9 * max(1.0, target))
    return float(np.partition(samples, k - 1)[k - 1])


def mc_null_quantile(
    model, n, minseg=1, alpha=0.05, B=DEFAULT_REPS, seed=0, *, null_mean=None, workers=None
) -> float:
    """Monte Carlo ``1 - alpha`` quantile of the null ``max_tau LR_tau``."""
    _check_alpha(alpha)
    if B * (1.0 - alpha) < 1:
        raise ConfigurationError(f"B(1-alpha) = {B * (1 - alpha):g} < 1")
    samples = mc_null_max_lr(model, n, minseg, B, seed, null_mean=null_mean, workers=workers)
    return empirical_quantile(samples, alpha)


# -- analytic rules


def gumbel_threshold(n: int, alpha: float) -> tuple[float, float]:
    """Cutoffs from the Gumbel limit of ``max_tau C_tau / sigma``.

    Returns ``(c_cusum, c_lr)`` with ``c_lr = c_cusum**2``.
    """
    _check_alpha(alpha)
    if n < 16:
        raise ValueError(f"the Gumbel rule needs n >= 16 so that log log log n > 0, got {n}")
    lln = math.log(math.log(n))
    a = (2.0 * lln) ** -0.5
    b = 1.0 / a + 0.5 * a * math.log(lln)
    u = -math.log(math.sqrt(math.pi) / 2.0 * -math.log1p(-alpha))
    c = b + a * u
    return c, c * c


def normal_quantile(p: float) -> float:
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return float(special.ndtri(p))


def chi2_1_sf(c: float) -> float:
    """``P(chi2_1 > c) = 2(1 - Phi(sqrt c))``."""
    if not c >= 0:
        raise ValueError(f"c must be >= 0, got {c}")
    return float(special.erfc(math.sqrt(c / 2.0)))


def bonferroni_threshold(n: int, alpha: float) -> float:
    """Solve ``(n - 1) P(chi2_1 > c) = alpha``."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    p = alpha / (2.0 * (n - 1))
    if p >= 0.5:
        return 0.0
    # upper quantile via the lower tail keeps precision for tiny p
    return normal_quantile(p) ** 2


def two_log_n(n: int) -> float:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return 2.0 * math.log(n)


def resolve_threshold(rule, model, n: int, minseg: int = 1, workers=None) -> float:
    """Turn a threshold rule into a numeric cutoff on the LR scale."""
    if isinstance(rule, Fixed):
        return float(rule.c)
    if isinstance(rule, TwoLogN):
        return two_log_n(n)
    if isinstance(rule, BonferroniExact):
        return bonferroni_threshold(n, rule.alpha)
    if isinstance(rule, GumbelAsymptotic):
        if minseg != 1:
            raise ConfigurationError("the Gumbel rule is only defined without a minimum segment length")
        if not isinstance(model, GaussMeanKnownVar):
            raise ConfigurationError("the Gumbel rule applies to the known-variance CUSUM statistic only")
        return gumbel_threshold(n, rule.alpha)[1]
    if isinstance(rule, MonteCarlo):
        return mc_null_quantile(
            model, n, minseg, rule.alpha, rule.B, rule.seed, null_mean=rule.null_mean, workers=workers
        )
    raise ConfigurationError(f"unknown threshold rule {rule!r}")


# -- power


def noncentrality(n: int, q0: float, delta: float) -> float:
    """Non-centrality of ``LR_{tau0}`` for a change of size ``delta`` at ``q0 * n``."""
    if not 0 < q0 < 1:
        raise ValueError(f"q0 must lie in (0, 1), got {q0}")
    return n * delta * delta / (1.0 / q0 + 1.0 / (1.0 - q0))


def power_lower_bound(nu: float, k: float) -> float:
    """Lower bound on ``P(chi2_1(nu) > k)``; zero when uninformative."""
    if nu <= k - 1:
        return 0.0
    return 1.0 - math.exp(-((1.0 + nu - k) ** 2) / (4.0 + 8.0 * nu))


@dataclass(frozen=True)
class PowerParams:
    n: int
    q0: float
    delta: float
    k: float

    def __post_init__(self):
        if not 0 < self.q0 < 1:
            raise ConfigurationError(f"q0 must lie in (0, 1), got {self.q0}")
        if not self.delta >= 0:
            raise ConfigurationError(f"delta must be >= 0, got {self.delta}")

    @property
    def nu(self) -> float:
        return noncentrality(self.n, self.q0, self.delta)

    @property
    def bound(self) -> float:
        return power_lower_bound(self.nu, self.k)
