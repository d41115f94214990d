"""Segment summaries and the CUSUM statistic.

Everything here works from cumulative sums of the data, so the CUSUM
statistic for every candidate split costs O(n) in total.  Indices in the
public functions are 1-based and inclusive, i.e. ``segment_mean(ps, 1, n)``
is the mean of the whole series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "InvalidSeriesError",
    "ConfigurationError",
    "DegenerateInputError",
    "TimeSeries",
    "PrefixSums",
    "CusumCurve",
    "as_series",
    "compensated_cumsum",
    "build_prefix",
    "segment_mean",
    "cusum",
    "cusum_curve",
]


class InvalidSeriesError(ValueError):
    """Raised for input data that no statistic can be computed on."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConfigurationError(ValueError):
    """Raised for parameter combinations that cannot be honoured."""


class DegenerateInputError(ValueError):
    """Raised when the data make the statistic undefined (e.g. zero variance)."""


@dataclass(frozen=True)
class TimeSeries:
    """A validated univariate series ``X_1, ..., X_n``.

    ``values`` is a read-only float64 copy of the input.
    """

    values: np.ndarray

    def __post_init__(self):
        x = np.array(self.values, dtype=np.float64)
        if x.ndim != 1:
            raise InvalidSeriesError(f"series must be one-dimensional, got shape {x.shape}")
        if x.size < 2:
            raise InvalidSeriesError(f"series needs at least 2 values, got {x.size}")
        bad = ~np.isfinite(x)
        if bad.any():
            i = int(np.argmax(bad))
            raise InvalidSeriesError(f"non-finite value {x[i]!r} at index {i + 1}", index=i + 1)
        x.setflags(write=False)
        object.__setattr__(self, "values", x)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def is_counts(self) -> bool:
        """True if every value is a nonnegative integer."""
        x = self.values
        return bool(np.all(x >= 0) and np.all(x == np.floor(x)))


def as_series(data) -> TimeSeries:
    if isinstance(data, TimeSeries):
        return data
    return TimeSeries(data)


def compensated_cumsum(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Cumulative sum with error-free-transformation compensation.

    The sequential sums from ``np.cumsum`` are corrected by the exact rounding
    error of every addition (TwoSum), accumulated in a second pass.  The result
    is as accurate as if it had been computed in roughly twice the working
    precision, at the cost of a few extra vectorized passes.
    """
    x = np.asarray(x, dtype=np.float64)
    s = np.cumsum(x, axis=axis)
    if x.shape[axis] < 2:
        return s
    x = np.moveaxis(x, axis, -1)
    s = np.moveaxis(s, axis, -1)
    prev = s[..., :-1]
    new = s[..., 1:]
    # err = (prev - (new - z)) + (x - z) with z = new - prev, in place
    z = np.subtract(new, prev)
    err = np.subtract(new, z)
    np.subtract(prev, err, out=err)
    np.subtract(x[..., 1:], z, out=z)
    err += z
    del z
    np.cumsum(err, axis=-1, out=err)
    new += err
    return np.moveaxis(s, -1, axis)


def _prefix(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Compensated cumulative sums with a leading zero along ``axis``."""
    x = np.moveaxis(np.asarray(x, dtype=np.float64), axis, -1)
    out = np.zeros(x.shape[:-1] + (x.shape[-1] + 1,))
    out[..., 1:] = compensated_cumsum(x)
    return np.moveaxis(out, -1, axis)


@dataclass(frozen=True)
class PrefixSums:
    """Cumulative sums ``s[t] = X_1 + ... + X_t`` and ``q[t]`` of the squares.

    Both arrays have length ``n + 1`` with ``s[0] = q[0] = 0``.
    """

    s: np.ndarray
    q: np.ndarray

    @property
    def n(self) -> int:
        return self.s.size - 1

    def segment_sum(self, s: int, t: int) -> float:
        _check_segment(self.n, s, t)
        return float(self.s[t] - self.s[s - 1])


def build_prefix(ts) -> PrefixSums:
    ts = as_series(ts)
    x = ts.values
    return PrefixSums(s=_prefix(x), q=_prefix(x * x))


def _check_segment(n, s, t):
    if not (1 <= s <= t <= n):
        raise IndexError(f"segment [{s}, {t}] is not within 1..{n}")


def segment_mean(ps: PrefixSums, s: int, t: int) -> float:
    """Sample mean of ``X_s, ..., X_t`` (1-based, inclusive)."""
    return ps.segment_sum(s, t) / (t - s + 1)


def cusum(ps: PrefixSums, tau: int) -> float:
    n = ps.n
    if not (1 <= tau <= n - 1):
        raise IndexError(f"tau={tau} is not within 1..{n - 1}")
    # same arithmetic as signed_cusum_from_prefix, so both paths agree bitwise
    tau_f = float(tau)
    signed = (n * ps.s[tau] - tau_f * ps.s[n]) / np.sqrt(n * tau_f * (n - tau_f))
    return float(abs(signed))


@dataclass(frozen=True)
class CusumCurve:
    """CUSUM statistics for ``tau = 1..n-1``.

    ``c[k]`` and ``c_signed[k]`` hold the values for ``tau = k + 1``.
    """

    c: np.ndarray
    c_signed: np.ndarray

    @property
    def taus(self) -> np.ndarray:
        return np.arange(1, self.c.size + 1)

    def __getitem__(self, tau: int) -> float:
        if not (1 <= tau <= self.c.size):
            raise IndexError(f"tau={tau} is not within 1..{self.c.size}")
        return float(self.c[tau - 1])


def signed_cusum_from_prefix(s: np.ndarray) -> np.ndarray:
    """Signed CUSUM along the last axis of prefix sums ``s`` (length n+1).

    Works on a single prefix vector or a stack of them.
    """
    n = s.shape[-1] - 1
    tau = np.arange(1, n, dtype=np.float64)
    total = s[..., -1:]
    # sqrt(tau(n-tau)/n) * (head/tau - (total-head)/(n-tau)), rearranged so
    # only one subtraction of comparable quantities happens.
    out = s[..., 1:n] * n
    out -= tau * total
    denom = n - tau
    denom *= tau
    denom *= n
    np.sqrt(denom, out=denom)
    out /= denom
    return out


def cusum_curve(ts) -> CusumCurve:
    ts = as_series(ts)
    s = _prefix(ts.values)
    signed = signed_cusum_from_prefix(s)
    return CusumCurve(c=np.abs(signed), c_signed=signed)
