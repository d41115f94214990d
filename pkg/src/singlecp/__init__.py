"""Detecting a single change in a time series with likelihood-ratio tests.

The main entry points are :func:`detect` with a :class:`DetectionConfig`,
the ``lr_*`` statistics, threshold rules from :mod:`singlecp.calibration`,
and simulation tools in :mod:`singlecp.noise`.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ConfigurationError,
    CusumCurve,
    DegenerateInputError,
    InvalidSeriesError,
    PrefixSums,
    TimeSeries,
    as_series,
    build_prefix,
    cusum,
    cusum_curve,
    segment_mean,
)
from .models import (  # noqa: E402
    Ar1MeanKnown,
    GaussMeanAndVar,
    GaussMeanKnownVar,
    GaussMeanUnknownVar,
    GaussSlopeKnownVar,
    GaussVarKnownMean,
    LrCurve,
    PoissonMean,
    anscombe_transform,
    lr_ar1_mean,
    lr_curve,
    lr_mean_and_variance,
    lr_mean_known_var,
    lr_mean_unknown_var,
    lr_poisson,
    lr_slope,
    lr_variance_known_mean,
)
from .calibration import (  # noqa: E402
    BonferroniExact,
    Fixed,
    GumbelAsymptotic,
    MonteCarlo,
    TwoLogN,
    bonferroni_threshold,
    gumbel_threshold,
    mc_null_quantile,
    noncentrality,
    power_lower_bound,
    resolve_threshold,
    two_log_n,
)
from .detector import DetectionConfig, DetectionResult, detect, estimate_delta  # noqa: E402
from .noise import (  # noqa: E402
    Ar1Noise,
    IidGauss,
    PiecewiseConstant,
    PiecewiseLinear,
    PoissonCounts,
    StudentT,
    ar1_inflation,
    gen_ar1,
    gen_series,
    longrun_inflation,
    mad_sigma,
    simulate_scaled_bridge,
)
