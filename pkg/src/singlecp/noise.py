"""Simulation of signals and noise, robust scale estimation, and the
Brownian-bridge description of the CUSUM process.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np
from scipy.signal import lfilter

from ._rng import as_generator
from .core import ConfigurationError, DegenerateInputError, TimeSeries, as_series

__all__ = [
    "PiecewiseConstant",
    "PiecewiseLinear",
    "IidGauss",
    "Ar1Noise",
    "StudentT",
    "PoissonCounts",
    "SignalSpec",
    "NoiseSpec",
    "BridgeParams",
    "MadEstimate",
    "gen_series",
    "sample_series",
    "gen_ar1",
    "mad_sigma",
    "ar1_inflation",
    "longrun_inflation",
    "simulate_scaled_bridge",
]

MAD_CONSISTENCY = 1.4826


@dataclass(frozen=True)
class PiecewiseConstant:
    """Mean ``levels[k]`` on the k-th segment; segment k ends at ``changepoints[k]``."""

    n: int
    changepoints: tuple = ()
    levels: tuple = (0.0,)

    def __post_init__(self):
        cps = tuple(int(t) for t in self.changepoints)
        levels = tuple(float(v) for v in self.levels)
        object.__setattr__(self, "changepoints", cps)
        object.__setattr__(self, "levels", levels)
        if self.n < 2:
            raise ConfigurationError(f"n must be >= 2, got {self.n}")
        if len(levels) != len(cps) + 1:
            raise ConfigurationError("need exactly one more level than change-points")
        if any(not 1 <= t <= self.n - 1 for t in cps) or any(a >= b for a, b in zip(cps, cps[1:])):
            raise ConfigurationError(f"change-points must be strictly increasing within 1..{self.n - 1}")

    def mean(self) -> np.ndarray:
        edges = (0,) + self.changepoints + (self.n,)
        return np.repeat(self.levels, np.diff(edges))


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear mean ``intercept + slope*i + sum_k d_k (i - tau_k)_+``."""

    n: int
    intercept: float = 0.0
    slope: float = 0.0
    kinks: tuple = ()

    def __post_init__(self):
        kinks = tuple((int(t), float(d)) for t, d in self.kinks)
        object.__setattr__(self, "kinks", kinks)
        if self.n < 2:
            raise ConfigurationError(f"n must be >= 2, got {self.n}")
        taus = [t for t, _ in kinks]
        if any(not 1 <= t <= self.n - 1 for t in taus) or any(a >= b for a, b in zip(taus, taus[1:])):
            raise ConfigurationError(f"kinks must be strictly increasing within 1..{self.n - 1}")

    def mean(self) -> np.ndarray:
        i = np.arange(1, self.n + 1, dtype=np.float64)
        f = self.intercept + self.slope * i
        for tau, d in self.kinks:
            f = f + d * np.maximum(i - tau, 0.0)
        return f


SignalSpec = Union[PiecewiseConstant, PiecewiseLinear]


@dataclass(frozen=True)
class IidGauss:
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ConfigurationError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class Ar1Noise:
    """Stationary AR(1) noise with lag-1 autocorrelation ``rho`` and marginal sd ``sigma``."""

    rho: float
    sigma: float = 1.0

    def __post_init__(self):
        if not abs(self.rho) < 1:
            raise ConfigurationError(f"|rho| must be < 1, got {self.rho}")
        if not self.sigma >= 0:
            raise ConfigurationError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class StudentT:
    """Student-t noise multiplied by ``scale``.

    With ``standardize=True`` the draws are first rescaled to unit variance,
    so ``scale`` becomes the standard deviation.
    """

    df: float
    scale: float = 1.0
    standardize: bool = False

    def __post_init__(self):
        if not self.df > 2:
            raise ConfigurationError(f"df must exceed 2 for finite variance, got {self.df}")
        if not self.scale >= 0:
            raise ConfigurationError(f"scale must be >= 0, got {self.scale}")

    @property
    def sd(self) -> float:
        if self.standardize:
            return self.scale
        return self.scale * math.sqrt(self.df / (self.df - 2))


@dataclass(frozen=True)
class PoissonCounts:
    """Poisson draws whose means are the (positive) signal levels."""


NoiseSpec = Union[IidGauss, Ar1Noise, StudentT, PoissonCounts]


def _ar1_filter(eta, rho, sigma):
    # eps_1 = sigma*eta_1, eps_t = rho*eps_{t-1} + sigma*sqrt(1-rho^2)*eta_t
    drive = eta * (sigma * math.sqrt(1.0 - rho * rho))
    drive[..., 0] = sigma * eta[..., 0]
    if rho == 0.0:
        return drive
    return lfilter([1.0], [1.0, -rho], drive, axis=-1)


def _draw(mean, noise, rng, size):
    shape = (mean.size,) if size is None else (size, mean.size)
    if isinstance(noise, PoissonCounts):
        if np.any(mean <= 0):
            raise ConfigurationError("Poisson counts need strictly positive signal levels")
        return rng.poisson(np.broadcast_to(mean, shape)).astype(np.float64)
    if isinstance(noise, IidGauss):
        eps = noise.sigma * rng.standard_normal(shape)
    elif isinstance(noise, Ar1Noise):
        eps = _ar1_filter(rng.standard_normal(shape), noise.rho, noise.sigma)
    elif isinstance(noise, StudentT):
        eps = rng.standard_t(noise.df, size=shape)
        if noise.standardize:
            eps *= math.sqrt((noise.df - 2) / noise.df)
        eps *= noise.scale
    else:
        raise ConfigurationError(f"unknown noise model {noise!r}")
    return mean + eps


def gen_series(signal, noise, seed) -> TimeSeries:
    """One realisation ``X_i = f_i + eps_i`` (or Poisson draws with mean ``f_i``)."""
    if isinstance(noise, PoissonCounts) and not isinstance(signal, PiecewiseConstant):
        raise ConfigurationError("Poisson counts require a piecewise-constant signal")
    return TimeSeries(_draw(signal.mean(), noise, as_generator(seed), None))


def sample_series(signal, noise, rng, size=None) -> np.ndarray:
    """Like :func:`gen_series` but draws ``size`` rows from an existing generator."""
    if isinstance(noise, PoissonCounts) and not isinstance(signal, PiecewiseConstant):
        raise ConfigurationError("Poisson counts require a piecewise-constant signal")
    return _draw(signal.mean(), noise, rng, size)


def gen_ar1(n: int, rho: float, sigma: float = 1.0, seed=None, size=None) -> np.ndarray:
    """Stationary Gaussian AR(1) noise, started from its marginal law."""
    if not abs(rho) < 1:
        raise ConfigurationError(f"|rho| must be < 1, got {rho}")
    rng = as_generator(seed)
    shape = (n,) if size is None else (size, n)
    return _ar1_filter(rng.standard_normal(shape), float(rho), float(sigma))


class MadEstimate(NamedTuple):
    sigma: float
    degenerate: bool


def mad_sigma(ts) -> MadEstimate:
    """Noise sd from the MAD of first differences, robust to a change in mean.

    Differencing removes a piecewise-constant mean except at the change, and
    doubles the noise variance, hence the ``1/sqrt(2)``.
    """
    x = as_series(ts).values
    if x.size < 3:
        raise ConfigurationError(f"need at least 3 values, got {x.size}")
    z = np.diff(x)
    mad = np.median(np.abs(z - np.median(z)))
    sigma = MAD_CONSISTENCY * mad / math.sqrt(2.0)
    return MadEstimate(float(sigma), sigma == 0.0)


def ar1_inflation(rho1: float) -> float:
    """Threshold multiplier (on the CUSUM scale) for AR(1) noise."""
    if not abs(rho1) < 1:
        raise ConfigurationError(f"|rho1| must be < 1, got {rho1}")
    return math.sqrt((1 + rho1) / (1 - rho1))


def longrun_inflation(rho: Iterable[float] | Callable[[int], float], max_terms: int = 1_000_000) -> float:
    """``sqrt(1 + 2 sum_h rho_h)`` for autocorrelations ``rho_1, rho_2, ...``.

    ``rho`` is either a finite sequence or a function of the lag ``h >= 1``;
    a function is summed until ``|rho_h| < 1e-12``.
    """
    if callable(rho):
        total = 0.0
        for h in range(1, max_terms + 1):
            r = float(rho(h))
            if abs(r) < 1e-12:
                break
            total += r
        else:
            raise ConfigurationError(f"autocorrelations not summable within {max_terms} lags")
    else:
        total = math.fsum(float(r) for r in rho)
    value = 1.0 + 2.0 * total
    if not value > 0 or not math.isfinite(value):
        raise ConfigurationError(f"long-run variance factor {value} is not positive")
    return math.sqrt(value)


@dataclass(frozen=True)
class BridgeParams:
    n: int
    delta: float
    q0: float
    grid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError(f"n must be >= 2, got {self.n}")
        if not 0 < self.q0 < 1:
            raise ConfigurationError(f"q0 must lie in (0, 1), got {self.q0}")
        object.__setattr__(self, "grid", np.arange(1, self.n) / self.n)

    def mu(self, q):
        """Drift shape: ``q(1-q0)`` up to ``q0``, ``(1-q)q0`` after."""
        q = np.asarray(q, dtype=np.float64)
        return np.where(q <= self.q0, q * (1 - self.q0), (1 - q) * self.q0)


def simulate_scaled_bridge(n: int, delta: float, q0: float, seed=None, size=None) -> np.ndarray:
    """Draw the scaled bridge ``W~0(i/n)``, i = 1..n-1.

    Its absolute values have the law of the CUSUM statistics (over sigma)
    for data with a change of size ``delta`` at ``q0 * n``.
    """
    p = BridgeParams(n, delta, q0)
    rng = as_generator(seed)
    shape = (n,) if size is None else (size, n)
    w = np.cumsum(rng.standard_normal(shape), axis=-1) / math.sqrt(n)
    t = p.grid
    bridge = w[..., :-1] - t * w[..., -1:]
    return (math.sqrt(n) * delta * p.mu(t) + bridge) / np.sqrt(t * (1 - t))
