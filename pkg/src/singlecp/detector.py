"""Single change-point test: threshold ``max_tau LR_tau`` and locate the change."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .calibration import resolve_threshold
from .core import ConfigurationError, as_series, build_prefix, segment_mean
from .models import admissible_range, lr_curve

__all__ = ["DetectionConfig", "DetectionResult", "detect", "estimate_delta"]


@dataclass(frozen=True)
class DetectionConfig:
    model: object
    minseg: int = 1
    threshold: float = 0.0

    def __post_init__(self):
        if not self.threshold >= 0:
            raise ConfigurationError(f"threshold must be >= 0, got {self.threshold}")
        if self.model.floors == (2, 2) and self.minseg < 2:
            raise ConfigurationError(f"{self.model.name} needs minseg >= 2")
        if self.minseg < 1:
            raise ConfigurationError(f"minseg must be >= 1, got {self.minseg}")

    @classmethod
    def from_rule(cls, model, rule, n: int, minseg: int = 1, workers=None) -> DetectionConfig:
        return cls(model, minseg, resolve_threshold(rule, model, n, minseg, workers=workers))


@dataclass(frozen=True)
class DetectionResult:
    detected: bool
    max_lr: float  # math.inf when the best split fits exactly
    tau_hat: int
    delta_hat: Optional[float]
    threshold: float


def estimate_delta(ts, tau: int) -> float:
    """Difference of segment means ``mean(X_{tau+1:n}) - mean(X_{1:tau})``."""
    ps = build_prefix(ts)
    n = ps.n
    if not 1 <= tau <= n - 1:
        raise IndexError(f"tau={tau} is not within 1..{n - 1}")
    return segment_mean(ps, tau + 1, n) - segment_mean(ps, 1, tau)


def detect(ts, config: DetectionConfig) -> DetectionResult:
    """Test for one change and report where it is.

    ``delta_hat`` is filled in for models with a change in mean even when
    nothing is detected; check ``detected`` before using it.
    """
    ts = as_series(ts)
    admissible_range(config.model, ts.n, config.minseg)
    curve = lr_curve(ts, config.model, config.minseg)
    tau_hat = curve.argmax()
    max_lr = curve.max()
    delta = estimate_delta(ts, tau_hat) if config.model.mean_type else None
    return DetectionResult(
        detected=bool(max_lr > config.threshold),
        max_lr=max_lr if math.isinf(max_lr) else float(max_lr),
        tau_hat=tau_hat,
        delta_hat=delta,
        threshold=float(config.threshold),
    )
