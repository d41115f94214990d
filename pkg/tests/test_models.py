import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from singlecp.core import ConfigurationError, DegenerateInputError, InvalidSeriesError, cusum_curve
from singlecp.models import (
    Ar1MeanKnown,
    GaussMeanAndVar,
    GaussMeanKnownVar,
    GaussMeanUnknownVar,
    GaussSlopeKnownVar,
    GaussVarKnownMean,
    PoissonMean,
    admissible_range,
    anscombe_transform,
    batch_lr,
    batch_max_lr,
    lr_ar1_mean,
    lr_curve,
    lr_mean_and_variance,
    lr_mean_known_var,
    lr_mean_unknown_var,
    lr_poisson,
    lr_slope,
    lr_variance_known_mean,
)

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def _oracle_cases():
    # (model, oracle(x, tau), data generator)
    return [
        (GaussMeanKnownVar(1.7), lambda x, t: oracles.lr_mean_known(x, t, 1.7), lambda r, n: r.normal(size=n)),
        (GaussMeanUnknownVar(), oracles.lr_mean_unknown, lambda r, n: r.normal(size=n)),
        (PoissonMean(), oracles.lr_poisson, lambda r, n: r.poisson(3.0, size=n).astype(float)),
        (GaussVarKnownMean(0.3), lambda x, t: oracles.lr_var_known_mean(x, t, 0.3), lambda r, n: r.normal(size=n)),
        (GaussMeanAndVar(), oracles.lr_mean_and_var, lambda r, n: r.normal(size=n)),
        (GaussSlopeKnownVar(0.8), lambda x, t: oracles.lr_slope(x, t, 0.8), lambda r, n: r.normal(size=n)),
        (Ar1MeanKnown(0.6), lambda x, t: oracles.lr_ar1(x, t, 0.6), lambda r, n: r.normal(size=n)),
    ]


@pytest.mark.parametrize("model, oracle, draw", _oracle_cases(), ids=lambda v: getattr(v, "name", ""))
@pytest.mark.parametrize("n", [4, 7, 30, 120])
def test_matches_dense_oracle(model, oracle, draw, n):
    rng = np.random.default_rng(n)
    minseg = 2 if isinstance(model, GaussMeanAndVar) else 1
    for _ in range(3):
        x = draw(rng, n) + rng.normal() * 0  # keep dtype float
        curve = lr_curve(x, model, minseg)
        want = np.array([oracle(x, t) for t in curve.taus])
        np.testing.assert_allclose(curve.values, want, rtol=1e-9, atol=1e-8)


def test_hand_examples():
    assert lr_mean_known_var([0, 0, 1, 1], 1.0)[2] == pytest.approx(1.0, abs=1e-12)
    assert lr_mean_unknown_var([0, 0, 1, 3])[2] == pytest.approx(4 * math.log(3), abs=1e-12)
    assert lr_poisson([1, 1, 3, 3])[2] == pytest.approx(12 * math.log(3) - 16 * math.log(2), abs=1e-12)
    assert lr_variance_known_mean([1, 1, 2, 2], 0.0)[2] == pytest.approx(4 * math.log(2.5) - 2 * math.log(4), abs=1e-12)
    assert lr_mean_and_variance([0, 1, 10, 11])[2] == pytest.approx(4 * math.log(25.25 / 0.25), abs=1e-9)
    assert lr_mean_and_variance([0, 1, 10, 11])[2] == pytest.approx(18.4605, abs=1e-4)
    assert lr_slope([1, 2, 3, 5, 7, 9], 1.0)[3] == pytest.approx(1.0857142857, abs=1e-9)


def test_anscombe():
    np.testing.assert_allclose(anscombe_transform([0, 1]).values, [1.22474487, 2.34520788], atol=1e-8)
    y = anscombe_transform(np.arange(20)).values
    assert np.all(np.diff(y) > 0)
    with pytest.raises(InvalidSeriesError):
        anscombe_transform([1, -1])


def test_zero_cases():
    assert np.all(lr_mean_known_var(np.full(10, 2.0)).values == 0)
    assert np.all(lr_poisson(np.zeros(10)).values == 0)
    assert np.all(lr_poisson(np.full(10, 4.0)).values == 0)
    assert np.allclose(lr_variance_known_mean([1, -1, 1, -1]).values, 0, atol=1e-12)
    assert np.all(lr_slope(3.0 + 0.5 * np.arange(40)).values < 1e-8)


def test_known_var_sigma_scaling():
    x = np.random.default_rng(2).normal(size=50)
    np.testing.assert_allclose(lr_mean_known_var(x, 2.0).values, lr_mean_known_var(x, 1.0).values / 4, rtol=1e-12)


def test_known_var_is_squared_cusum():
    x = np.random.default_rng(3).normal(size=200)
    np.testing.assert_allclose(lr_mean_known_var(x, 1.5).values, cusum_curve(x).c ** 2 / 1.5**2, rtol=1e-12)


def test_unknown_var_infinite_flag():
    curve = lr_mean_unknown_var([0, 0, 1, 1])
    assert curve.is_infinite(2) and curve[2] == math.inf and math.isnan(curve.values[1])
    assert not curve.is_infinite(1)
    assert curve.argmax() == 2 and curve.max() == math.inf
    with pytest.raises(DegenerateInputError):
        lr_mean_unknown_var([2, 2, 2, 2])


def test_mean_and_var_flags_constant_segment():
    curve = lr_mean_and_variance([3, 3, 3, 1, 5, 2, 7, 4])
    assert curve.is_infinite(2) and curve.is_infinite(3)
    assert curve.argmax() == 2  # smallest flagged tau
    with pytest.raises(ConfigurationError):
        lr_mean_and_variance(np.arange(10.0), minseg=1)


def test_poisson_rejects_non_counts():
    with pytest.raises(InvalidSeriesError) as info:
        lr_poisson([1, 2, 2.5, 3])
    assert info.value.index == 3
    with pytest.raises(InvalidSeriesError):
        lr_poisson([1, -2, 2, 3])


def test_slope_range_and_minimum_length():
    curve = lr_slope(np.random.default_rng(4).normal(size=10))
    assert (curve.tau_lo, curve.tau_hi) == (2, 9)
    with pytest.raises(InvalidSeriesError):
        lr_slope([1.0, 2.0, 4.0])


def test_admissible_range():
    assert admissible_range(GaussMeanKnownVar(), 10, 1) == (1, 9)
    assert admissible_range(GaussMeanKnownVar(), 10, 3) == (3, 7)
    assert admissible_range(GaussMeanAndVar(), 10, 2) == (2, 8)
    with pytest.raises(ConfigurationError):
        admissible_range(GaussMeanKnownVar(), 10, 6)
    with pytest.raises(ConfigurationError):
        admissible_range(GaussMeanKnownVar(), 10, 0)


def test_minseg_restricts_curve():
    x = np.random.default_rng(5).normal(size=40)
    full = lr_mean_known_var(x)
    cut = lr_mean_known_var(x, minseg=5)
    assert (cut.tau_lo, cut.tau_hi) == (5, 35)
    np.testing.assert_array_equal(cut.values, full.values[4:35])


def test_ar1_reduces_to_iid():
    x = np.random.default_rng(6).normal(size=60)
    np.testing.assert_allclose(lr_ar1_mean(x, 0.0).values, lr_mean_known_var(x).values, atol=1e-10)


def test_ar1_constant_invariance():
    x = np.random.default_rng(7).normal(size=60)
    np.testing.assert_allclose(lr_ar1_mean(x + 12.5, 0.7).values, lr_ar1_mean(x, 0.7).values, atol=1e-9)


def test_ar1_dense_oracle_n50():
    x = np.random.default_rng(8).normal(size=50)
    curve = lr_ar1_mean(x, 0.5)
    want = [oracles.lr_ar1(x, t, 0.5) for t in curve.taus]
    np.testing.assert_allclose(curve.values, want, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(6, 40), elements=finite), finite, finite)
def test_slope_line_invariance(x, a, b):
    i = np.arange(1, x.size + 1)
    base = lr_slope(x)
    moved = lr_slope(x + a + b * i / x.size)
    scale = max(1.0, float(np.sum(x * x)))
    np.testing.assert_allclose(moved.values, base.values, atol=1e-8 * scale)


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, st.integers(4, 40), elements=st.floats(-10, 10)).filter(lambda v: np.ptp(v) > 1e-3),
    st.floats(0.1, 10),
    st.floats(-50, 50),
)
def test_unknown_var_affine_invariance(x, a, b):
    base, moved = lr_mean_unknown_var(x), lr_mean_unknown_var(a * x + b)
    np.testing.assert_array_equal(base.infinite, moved.infinite)
    ok = ~base.infinite
    np.testing.assert_allclose(moved.values[ok], base.values[ok], rtol=1e-7, atol=1e-7)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(4, 40), elements=st.floats(-10, 10)), st.floats(-50, 50))
def test_mean_and_var_translation_invariance(x, k):
    base = lr_mean_and_variance(x) if np.ptp(x) > 1e-3 else None
    if base is None:
        return
    moved = lr_mean_and_variance(x + k)
    ok = ~(base.infinite | moved.infinite)
    np.testing.assert_allclose(moved.values[ok], base.values[ok], rtol=1e-6, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(2, 40), elements=finite))
def test_var_known_mean_sign_flip(x):
    if np.all(x == 0):
        return
    a, b = lr_variance_known_mean(x), lr_variance_known_mean(-x)
    np.testing.assert_array_equal(a.infinite, b.infinite)
    np.testing.assert_allclose(a.values, b.values, equal_nan=True, rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(4, 50), elements=finite), st.sampled_from(range(7)))
def test_nonnegative(x, k):
    models = [
        GaussMeanKnownVar(),
        GaussMeanUnknownVar(),
        PoissonMean(),
        GaussVarKnownMean(),
        GaussMeanAndVar(),
        GaussSlopeKnownVar(),
        Ar1MeanKnown(0.4),
    ]
    model = models[k]
    if isinstance(model, PoissonMean):
        x = np.abs(np.round(x))
    try:
        curve = lr_curve(x, model, 2 if isinstance(model, GaussMeanAndVar) else 1)
    except DegenerateInputError:
        return
    finite_vals = curve.values[~curve.infinite]
    assert np.all(finite_vals >= 0)


def test_unknown_var_monotone_in_cusum():
    x = np.random.default_rng(9).normal(size=300)
    lu = lr_mean_unknown_var(x).values
    c2 = lr_mean_known_var(x).values
    order = np.argsort(c2)
    assert np.all(np.diff(lu[order]) >= 0)


def test_taylor_consistency_unknown_var():
    n = 10_000
    X = np.random.default_rng(10).standard_normal((100, n))
    _, lu, _ = batch_lr(X, GaussMeanUnknownVar())
    _, c2, _ = batch_lr(X, GaussMeanKnownVar())
    S2 = np.sum((X - X.mean(axis=1, keepdims=True)) ** 2, axis=1, keepdims=True)
    approx = c2 / ((S2 - c2) / n)
    gap = np.abs(lu - approx)[:, n // 4 - 1 : 3 * n // 4].max(axis=1)
    assert np.median(gap) <= 10 / n


def _poisson_vs_anscombe(reps, seed):
    n = 1000
    rng = np.random.default_rng(seed)
    P, G = [], []
    for _ in range(reps):
        x = rng.poisson(5.0, size=n).astype(float)
        P.append(lr_poisson(x)[n // 2])
        G.append(lr_mean_known_var(anscombe_transform(x))[n // 2])
    return np.array(P), np.array(G)


def test_anscombe_tracks_poisson_in_middle():
    P, G = _poisson_vs_anscombe(100, 11)
    ok = P > 0
    assert abs(np.median(G[ok] / P[ok]) - 1) < 0.05
    assert np.corrcoef(P, G)[0, 1] > 0.95
    big = P > 3.84
    assert np.median(np.abs(P - G)[big] / P[big]) < 0.15


@pytest.mark.xfail(strict=True, reason="relative gap is unstable when the null statistic is near 0")
def test_anscombe_relative_gap_unconditional():
    P, G = _poisson_vs_anscombe(100, 11)
    ok = P > 0
    assert np.median(np.abs(P - G)[ok] / P[ok]) < 0.15


def test_poisson_diverges_from_gaussian_at_edges():
    # low counts: a single early count dominates the Poisson statistic
    x = np.zeros(200)
    x[0] = 2.0
    x[100:] = np.random.default_rng(12).poisson(0.1, 100)
    p = lr_poisson(x)
    g = lr_mean_known_var(anscombe_transform(x))
    assert p[1] / max(g[1], 1e-12) > 2


def test_batch_max_ties_and_infinite():
    X = np.array([[0.0, 0.0, 1.0, 1.0], [0.0, 1.0, 0.0, 1.0]])
    best, tau = batch_max_lr(X, GaussMeanKnownVar())
    assert tau[0] == 2 and best[0] == pytest.approx(1.0)
    # a symmetric curve has its maximum twice; the left one wins
    best, tau = batch_max_lr(np.array([[1.0, 0.0, 0.0, 1.0]]), GaussMeanKnownVar())
    assert tau[0] == 1


def test_poisson_non_integer_when_unchecked():
    taus, lr, inf = batch_lr(np.array([0.5, 0.5, 1.5, 1.5]), PoissonMean(), check_counts=False)
    assert lr[0, 1] > 0


@pytest.mark.parametrize("scale", [1e-250, 1e-150, 1e150, 1e200])
def test_variance_statistics_extreme_magnitudes(scale):
    x = np.array([1.4, 1.4, 3.0, 1.0, 0.2, 2.5])
    np.testing.assert_allclose(lr_variance_known_mean(x * scale).values, lr_variance_known_mean(x).values, rtol=1e-12)
    np.testing.assert_allclose(lr_mean_and_variance(x * scale).values, lr_mean_and_variance(x).values, rtol=1e-10)
