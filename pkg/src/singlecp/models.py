"""Likelihood-ratio statistics for a single change at each candidate ``tau``.

Every statistic is evaluated for all admissible split points at once from
cumulative sums, so a full curve costs O(n).  The private ``_lr_*`` kernels
operate on a stack of series of shape ``(B, n)``; the public ``lr_*``
functions wrap them for a single series and return an :class:`LrCurve`.

Split points ``tau`` are 1-based: the first segment is ``X_1..X_tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import (
    ConfigurationError,
    DegenerateInputError,
    InvalidSeriesError,
    TimeSeries,
    _prefix,
    as_series,
    signed_cusum_from_prefix,
)

__all__ = [
    "GaussMeanKnownVar",
    "GaussMeanUnknownVar",
    "PoissonMean",
    "GaussVarKnownMean",
    "GaussMeanAndVar",
    "GaussSlopeKnownVar",
    "Ar1MeanKnown",
    "ModelSpec",
    "LrCurve",
    "admissible_range",
    "lr_curve",
    "lr_mean_known_var",
    "lr_mean_unknown_var",
    "lr_poisson",
    "anscombe_transform",
    "lr_variance_known_mean",
    "lr_mean_and_variance",
    "lr_slope",
    "lr_ar1_mean",
    "batch_lr",
    "batch_max_lr",
]

# Values this far below zero are treated as rounding noise and clamped.
NEG_TOL = 1e-9


@dataclass(frozen=True)
class GaussMeanKnownVar:
    sigma: float = 1.0
    name = "mean-known-var"
    floors = (1, 1)
    mean_type = True

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class GaussMeanUnknownVar:
    name = "mean-unknown-var"
    floors = (1, 1)
    mean_type = True


@dataclass(frozen=True)
class PoissonMean:
    name = "poisson"
    floors = (1, 1)
    mean_type = True


@dataclass(frozen=True)
class GaussVarKnownMean:
    mu: float = 0.0
    name = "var-known-mean"
    floors = (1, 1)
    mean_type = False

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ConfigurationError(f"mu must be finite, got {self.mu}")


@dataclass(frozen=True)
class GaussMeanAndVar:
    name = "mean-and-var"
    floors = (2, 2)
    mean_type = True


@dataclass(frozen=True)
class GaussSlopeKnownVar:
    sigma: float = 1.0
    name = "slope"
    floors = (2, 1)
    mean_type = False

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class Ar1MeanKnown:
    """Change in mean under stationary AR(1) noise with unit marginal variance."""

    phi: float = 0.0
    name = "ar1-mean"
    floors = (1, 1)
    mean_type = True

    def __post_init__(self):
        if not abs(self.phi) < 1:
            raise ConfigurationError(f"|phi| must be < 1, got {self.phi}")


ModelSpec = Union[
    GaussMeanKnownVar,
    GaussMeanUnknownVar,
    PoissonMean,
    GaussVarKnownMean,
    GaussMeanAndVar,
    GaussSlopeKnownVar,
    Ar1MeanKnown,
]


@dataclass(frozen=True)
class LrCurve:
    """``LR_tau`` over the admissible split points.

    ``values[k]`` belongs to ``taus[k]``.  Split points where the alternative
    fits exactly (the statistic is infinite) are marked in ``infinite`` and
    hold NaN in ``values``.
    """

    model: ModelSpec
    minseg: int
    taus: np.ndarray
    values: np.ndarray
    infinite: np.ndarray

    @property
    def tau_lo(self) -> int:
        return int(self.taus[0])

    @property
    def tau_hi(self) -> int:
        return int(self.taus[-1])

    def __len__(self):
        return self.taus.size

    def _pos(self, tau):
        k = int(tau) - self.tau_lo
        if not 0 <= k < self.taus.size:
            raise IndexError(f"tau={tau} outside admissible range {self.tau_lo}..{self.tau_hi}")
        return k

    def __getitem__(self, tau) -> float:
        k = self._pos(tau)
        return math.inf if self.infinite[k] else float(self.values[k])

    def is_infinite(self, tau) -> bool:
        return bool(self.infinite[self._pos(tau)])

    @property
    def infinite_taus(self) -> np.ndarray:
        return self.taus[self.infinite]

    def argmax(self) -> int:
        """Split point of the largest statistic; ties go to the smallest tau."""
        if self.infinite.any():
            return int(self.taus[np.argmax(self.infinite)])
        return int(self.taus[np.argmax(self.values)])

    def max(self) -> float:
        if self.infinite.any():
            return math.inf
        return float(self.values.max())


def admissible_range(model, n: int, minseg: int = 1) -> tuple[int, int]:
    """Inclusive ``(tau_lo, tau_hi)`` honouring ``minseg`` and the model's floors."""
    if minseg < 1 or 2 * minseg > n:
        raise ConfigurationError(f"minseg must satisfy 1 <= minseg <= n/2, got {minseg} for n={n}")
    lo_floor, hi_floor = model.floors
    lo = max(minseg, lo_floor)
    hi = n - max(minseg, hi_floor)
    if lo > hi:
        raise ConfigurationError(f"no admissible change-point for n={n}, minseg={minseg}")
    return lo, hi


def _clamp(lr, n):
    """Clamp tiny negative rounding artifacts to zero, in place."""
    tol = max(NEG_TOL, 64 * np.finfo(float).eps * n)
    bad = lr < -tol
    if bad.any():
        raise ArithmeticError(f"LR statistic {lr[bad].min():.3e} is negative beyond rounding")
    np.maximum(lr, 0.0, out=lr)
    return lr


def _suffix(x):
    """Compensated sums over ``i > t`` for t = 0..n along the last axis."""
    return _prefix(x[..., ::-1])[..., ::-1]


def _xlogx(x):
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


# -- kernels on (B, n) stacks; return LR for tau = 1..n-1 and an infinity mask


def _lr_mean_known(X, sigma):
    n = X.shape[-1]
    s = _prefix(X - X.mean(axis=-1, keepdims=True))
    lr = signed_cusum_from_prefix(s)
    np.square(lr, out=lr)
    if sigma != 1.0:
        lr /= sigma * sigma
    return lr, None


def _lr_mean_unknown(X):
    n = X.shape[-1]
    Xc = X - X.mean(axis=-1, keepdims=True)
    S2 = np.einsum("...i,...i->...", Xc, Xc)[..., None]
    if np.any(S2 == 0):
        raise DegenerateInputError("all values are equal; the unknown-variance statistic is undefined")
    c2 = np.square(signed_cusum_from_prefix(_prefix(Xc)))
    ratio = c2 / S2
    infinite = (1.0 - ratio) <= 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = -n * np.log1p(-np.minimum(ratio, 1.0))
    lr[infinite] = 0.0
    return _clamp(lr, n), infinite


def _lr_poisson(X):
    n = X.shape[-1]
    s = _prefix(X)
    tau = np.arange(1, n, dtype=np.float64)
    head = s[..., 1:n]
    tail = s[..., -1:] - head
    total = s[..., -1:]
    # tau * m1 log m1 with m1 = head/tau, written on the sums directly
    lr = 2.0 * (tau * _xlogx(head / tau) + (n - tau) * _xlogx(tail / (n - tau)) - n * _xlogx(total / n))
    return _clamp(lr, n), None


def _segment_log_lr(n, var_all, var_head, var_tail, zero_head, zero_tail):
    tau = np.arange(1, n, dtype=np.float64)
    infinite = zero_head | zero_tail
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = tau * np.log(var_all / var_head) + (n - tau) * np.log(var_all / var_tail)
    lr[infinite] = 0.0
    return _clamp(lr, n), infinite


def _unit_scale(D):
    # both variance statistics are invariant to rescaling the centred data;
    # dividing by the row maximum keeps the squares clear of under/overflow
    scale = np.max(np.abs(D), axis=-1, keepdims=True)
    return D / np.where(scale > 0, scale, 1.0)


def _lr_var_known_mean(X, mu):
    n = X.shape[-1]
    Y = np.square(_unit_scale(X - mu))
    q = _prefix(Y)
    qs = _suffix(Y)
    total = q[..., -1:]
    if np.any(total == 0):
        raise DegenerateInputError("all centred values are zero; the variance statistic is undefined")
    tau = np.arange(1, n, dtype=np.float64)
    head = q[..., 1:n] / tau
    tail = qs[..., 1:n] / (n - tau)
    return _segment_log_lr(n, total / n, head, tail, head <= 1e-300, tail <= 1e-300)


def _lr_mean_and_var(X):
    n = X.shape[-1]
    Xc = _unit_scale(X - X.mean(axis=-1, keepdims=True))
    Y = Xc * Xc
    s, q = _prefix(Xc), _prefix(Y)
    ss, qs = _suffix(Xc), _suffix(Y)
    tau = np.arange(1, n, dtype=np.float64)
    m = n - tau
    q_head, q_tail = q[..., 1:n], qs[..., 1:n]
    rss_head = q_head - np.square(s[..., 1:n]) / tau
    rss_tail = q_tail - np.square(ss[..., 1:n]) / m
    total = q[..., -1:]
    if np.any(total == 0):
        raise DegenerateInputError("all values are equal; the mean-and-variance statistic is undefined")
    # a segment RSS at the rounding level of its raw sum of squares is zero
    zero_head = rss_head <= 1e-12 * q_head
    zero_tail = rss_tail <= 1e-12 * q_tail
    return _segment_log_lr(n, total / n, rss_head / tau, rss_tail / m, zero_head, zero_tail)


def _slope_geometry(n):
    """Squared norm of the kink regressor after projecting out {1, i}.

    Returns ``(ww, kk)`` for tau = 1..n-1.  The kink at ``tau`` is represented
    by whichever of ``(tau - i)_+`` or ``(i - tau)_+`` has the shorter support;
    both leave the same residual since they differ by a line.
    """
    tau = np.arange(1, n, dtype=np.float64)
    c = (n + 1) / 2.0
    sic2 = n * (n * n - 1.0) / 12.0
    left = tau <= n / 2.0
    L = np.where(left, tau - 1.0, n - tau)  # support sizes of the kink column
    sum_j = L * (L + 1) / 2.0
    sum_j2 = L * (L + 1) * (2 * L + 1) / 6.0
    sum_ick = np.where(left, (tau - c) * sum_j - sum_j2, (tau - c) * sum_j + sum_j2)
    ww = sum_j2 - sum_j * sum_j / n - sum_ick * sum_ick / sic2
    return ww, sum_j2


def _lr_slope(X, sigma):
    n = X.shape[-1]
    if n < 4:
        raise InvalidSeriesError(f"the change-in-slope statistic needs n >= 4, got {n}")
    i = np.arange(1, n + 1, dtype=np.float64)
    ic = i - (n + 1) / 2.0
    R = X - X.mean(axis=-1, keepdims=True)
    R = R - (R @ ic)[..., None] * ic / (ic @ ic)
    tau = np.arange(1, n, dtype=np.float64)
    # R.k for the left kink sum_{i<=tau}(tau-i)R_i and the right kink
    # sum_{i>tau}(i-tau)R_i; equal because R is orthogonal to {1, i}.
    A, B = _prefix(R), _prefix(R * i)
    left_dot = tau * A[..., 1:n] - B[..., 1:n]
    SA, SB = _suffix(R), _suffix(R * (i - n))
    right_dot = SB[..., 1:n] + (n - tau) * SA[..., 1:n]
    dot = np.where(tau <= n / 2.0, left_dot, right_dot)
    ww, kk = _slope_geometry(n)
    if np.any(ww[1:] <= 1e-20 * kk[1:]):
        raise ArithmeticError("change-in-slope design is numerically rank deficient")
    ww = np.where(ww > 0, ww, np.inf)  # tau = 1 is outside every admissible range
    lr = np.square(dot) / ww
    if sigma != 1.0:
        lr /= sigma * sigma
    return lr, None


def _ar1_whiten(X, phi):
    Y = np.empty_like(X)
    Y[..., 0] = X[..., 0]
    Y[..., 1:] = (X[..., 1:] - phi * X[..., :-1]) / math.sqrt(1.0 - phi * phi)
    return Y


def _lr_ar1(X, phi):
    n = X.shape[-1]
    root = math.sqrt(1.0 - phi * phi)
    c = (1.0 - phi) / root
    # whitened constant regressor a = [1, c, ..., c]
    a = np.full(n, c)
    a[0] = 1.0
    Y = _ar1_whiten(X, phi)
    Yr = Y - ((Y @ a) / (a @ a))[..., None] * a
    tau = np.arange(1, n, dtype=np.float64)
    # whitened step regressor u_tau: 1/root at tau+1, c afterwards
    tail = _suffix(Yr)[..., 2 : n + 1]  # sum over t > tau + 1
    dot = Yr[..., 1:n] / root + c * tail
    rest = n - tau - 1
    uu = 1.0 / (root * root) + c * c * rest
    au = c / root + c * c * rest
    ww = uu - au * au / (a @ a)
    return np.square(dot) / ww, None


def batch_lr(X, model, minseg: int = 1, check_counts: bool = True):
    """LR curves for every row of ``X``.

    Returns ``(taus, values, infinite)`` where ``values`` carries ``+inf`` at
    degenerate split points (this is the internal representation used for
    Monte Carlo; public curves use an explicit flag instead).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[-1]
    lo, hi = admissible_range(model, n, minseg)
    if isinstance(model, GaussMeanKnownVar):
        lr, inf = _lr_mean_known(X, model.sigma)
    elif isinstance(model, GaussMeanUnknownVar):
        if n < 3:
            raise InvalidSeriesError("the unknown-variance statistic needs n >= 3")
        lr, inf = _lr_mean_unknown(X)
    elif isinstance(model, PoissonMean):
        if check_counts:
            _check_counts(X)
        lr, inf = _lr_poisson(X)
    elif isinstance(model, GaussVarKnownMean):
        lr, inf = _lr_var_known_mean(X, model.mu)
    elif isinstance(model, GaussMeanAndVar):
        if minseg < 2:
            raise ConfigurationError("the mean-and-variance statistic needs minseg >= 2")
        if n < 4:
            raise InvalidSeriesError("the mean-and-variance statistic needs n >= 4")
        lr, inf = _lr_mean_and_var(X)
    elif isinstance(model, GaussSlopeKnownVar):
        lr, inf = _lr_slope(X, model.sigma)
    elif isinstance(model, Ar1MeanKnown):
        lr, inf = _lr_ar1(X, model.phi)
    else:
        raise ConfigurationError(f"unknown model {model!r}")
    lr = lr[..., lo - 1 : hi]
    if inf is None:
        inf = np.zeros(lr.shape, dtype=bool)
    else:
        inf = inf[..., lo - 1 : hi]
        lr = np.where(inf, np.inf, lr)
    return np.arange(lo, hi + 1), lr, inf


def batch_max_lr(X, model, minseg: int = 1):
    """Row-wise ``(max LR, argmax tau)``; infinite values win, ties go left."""
    taus, lr, _ = batch_lr(X, model, minseg)
    k = np.argmax(lr, axis=-1)
    return np.take_along_axis(lr, k[..., None], axis=-1)[..., 0], taus[k]


def _check_counts(X):
    bad = (X < 0) | (X != np.floor(X))
    if bad.any():
        i = int(np.argmax(bad.reshape(-1)) % X.shape[-1])
        raise InvalidSeriesError(
            f"Poisson model needs nonnegative integer counts; bad value at index {i + 1}", index=i + 1
        )


def lr_curve(ts, model, minseg: int = 1) -> LrCurve:
    """LR statistic of ``model`` at every admissible split point of ``ts``."""
    ts = as_series(ts)
    taus, lr, inf = batch_lr(ts.values[None, :], model, minseg)
    values = np.where(inf[0], np.nan, lr[0])
    return LrCurve(model=model, minseg=minseg, taus=taus, values=values, infinite=inf[0])


def lr_mean_known_var(ts, sigma: float = 1.0, minseg: int = 1) -> LrCurve:
    """Change in mean, Gaussian noise with known ``sigma``: ``C_tau^2 / sigma^2``."""
    return lr_curve(ts, GaussMeanKnownVar(sigma), minseg)


def lr_mean_unknown_var(ts, minseg: int = 1) -> LrCurve:
    """Change in mean with the common variance profiled out.

    ``n log(S^2 / (S^2 - C_tau^2))`` where ``S^2`` is the residual sum of
    squares about the overall mean.  Split points where the two-mean fit is
    exact are flagged infinite.
    """
    return lr_curve(ts, GaussMeanUnknownVar(), minseg)


def lr_poisson(ts, minseg: int = 1) -> LrCurve:
    return lr_curve(ts, PoissonMean(), minseg)


def anscombe_transform(ts) -> TimeSeries:
    """Variance-stabilising map ``2 sqrt(x + 3/8)`` for Poisson counts."""
    ts = as_series(ts)
    x = ts.values
    if np.any(x < 0):
        i = int(np.argmax(x < 0))
        raise InvalidSeriesError(f"negative value at index {i + 1}", index=i + 1)
    return TimeSeries(2.0 * np.sqrt(x + 0.375))


def lr_variance_known_mean(ts, mu: float = 0.0, minseg: int = 1) -> LrCurve:
    return lr_curve(ts, GaussVarKnownMean(mu), minseg)


def lr_mean_and_variance(ts, minseg: int = 2) -> LrCurve:
    return lr_curve(ts, GaussMeanAndVar(), minseg)


def lr_slope(ts, sigma: float = 1.0, minseg: int = 1) -> LrCurve:
    """Change in slope of a continuous piecewise-linear mean.

    The statistic is the drop in residual sum of squares when the kink
    regressor ``(i - tau)_+`` is added to the straight-line fit, divided by
    ``sigma^2``.  Admissible split points are ``2..n-1`` intersected with the
    ``minseg`` range.
    """
    return lr_curve(ts, GaussSlopeKnownVar(sigma), minseg)


def lr_ar1_mean(ts, phi: float, minseg: int = 1) -> LrCurve:
    """Change in mean under stationary AR(1) noise with known ``phi``.

    Generalised least squares in whitened coordinates; the first observation
    keeps its stationary unit variance.
    """
    return lr_curve(ts, Ar1MeanKnown(phi), minseg)
