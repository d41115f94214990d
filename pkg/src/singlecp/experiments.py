"""Desk-scale simulation studies, E1 to E13.

Each experiment is a function of a parameter dict and a master seed and
returns a :class:`ResultTable`.  Defaults are sized to finish in minutes on a
single core; ``full_scale=True`` raises replicate counts.  The columns of
every table are documented in the README.

Random streams: every simulation inside an experiment uses its own
``stream`` number, and every replicate its own generator, so a table is a
pure function of ``(id, overrides, seed)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy import stats

from . import __version__
from ._rng import as_generator
from .calibration import (
    MaxLr,
    SeriesSampler,
    bonferroni_threshold,
    empirical_quantile,
    gumbel_threshold,
    noncentrality,
    power_lower_bound,
    simulate,
    two_log_n,
)
from .core import ConfigurationError, as_series
from .models import (
    Ar1MeanKnown,
    GaussMeanAndVar,
    GaussMeanKnownVar,
    GaussSlopeKnownVar,
    LrCurve,
    PoissonMean,
    anscombe_transform,
    batch_lr,
    lr_curve,
)
from .noise import (
    Ar1Noise,
    IidGauss,
    PiecewiseConstant,
    PiecewiseLinear,
    PoissonCounts,
    StudentT,
    ar1_inflation,
    sample_series,
)

__all__ = [
    "DEFAULT_SEED",
    "EXPERIMENTS",
    "ExperimentRequest",
    "ResultTable",
    "run_experiment",
    "expected_lr_curve",
    "curve_roughness",
]

DEFAULT_SEED = 1


@dataclass
class ResultTable:
    columns: tuple
    rows: list
    footer: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row {row!r} does not have {len(self.columns)} columns")

    def column(self, name) -> list:
        k = self.columns.index(name)
        return [row[k] for row in self.rows]

    def where(self, **match) -> ResultTable:
        idx = {self.columns.index(k): v for k, v in match.items()}
        rows = [r for r in self.rows if all(r[k] == v for k, v in idx.items())]
        return ResultTable(self.columns, rows, dict(self.footer))

    def value(self, name, **match):
        """The single value of column ``name`` in the row matching ``match``."""
        sub = self.where(**match)
        if len(sub.rows) != 1:
            raise KeyError(f"{len(sub.rows)} rows match {match}")
        return sub.column(name)[0]

    def write_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if v is None else _fmt(v) for v in row])
        for key, value in self.footer.items():
            fh.write(f"# {key}={value}\r\n")

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            self.write_csv(fh)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


@dataclass(frozen=True)
class ExperimentRequest:
    id: str
    overrides: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    full_scale: bool = False
    workers: Optional[int] = None


def expected_lr_curve(signal, model, minseg: int = 1) -> LrCurve:
    """The statistic evaluated on the noiseless mean of ``signal``."""
    f = signal.mean()
    if isinstance(model, PoissonMean):
        if np.any(f < 0):
            raise ConfigurationError("Poisson means must be nonnegative")
        taus, lr, inf = batch_lr(f, model, minseg, check_counts=False)
        return LrCurve(model, minseg, taus, np.where(inf[0], np.nan, lr[0]), inf[0])
    return lr_curve(f, model, minseg)


def curve_roughness(values) -> float:
    """Mean squared first difference of a curve, relative to its variance.

    Near 0 for smooth curves, near 2 for white noise.
    """
    v = np.asarray(values, dtype=np.float64)
    return float(np.mean(np.diff(v) ** 2) / np.var(v))


# -- helpers shared by several experiments


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _null_max(model, n, minseg, B, seed, stream, workers, noise=None):
    noise = IidGauss(1.0) if noise is None else noise
    sampler = SeriesSampler(PiecewiseConstant(n), noise)
    return simulate(sampler, MaxLr(model, minseg), B, seed, stream, workers)


@dataclass(frozen=True)
class _MaxOverMinsegs:
    """Max LR for several minimum segment lengths from one curve."""

    model: Any
    minsegs: tuple

    def __call__(self, X):
        n = X.shape[-1]
        taus, lr, _ = batch_lr(X, self.model, 1)
        out = {}
        for m in self.minsegs:
            sl = (taus >= m) & (taus <= n - m)
            out[f"max_{m}"] = lr[:, sl].max(axis=-1)
        return out


@dataclass(frozen=True)
class _LrAtTaus:
    model: Any
    taus: tuple
    minseg: int = 1

    def __call__(self, X):
        taus, lr, _ = batch_lr(X, self.model, self.minseg)
        return {f"lr_{t}": lr[:, t - taus[0]] for t in self.taus}


@dataclass(frozen=True)
class _TwoStats:
    a: Any
    b: Any

    def __call__(self, X):
        out = {f"a_{k}": v for k, v in self.a(X).items()}
        out.update({f"b_{k}": v for k, v in self.b(X).items()})
        return out


@dataclass(frozen=True)
class _CusumPaths:
    def __call__(self, X):
        taus, lr, _ = batch_lr(X, GaussMeanKnownVar(), 1)
        return {"c": np.sqrt(lr)}


# -- experiments.  Each takes (params, seed, workers) and returns (columns, rows).


def _e1(p, seed, workers):
    rows = []
    alphas = _as_list(p["alpha"])
    for k, n in enumerate(_as_list(p["n"])):
        sims = _null_max(GaussMeanKnownVar(), n, 1, p["B"], seed, 10 + k, workers)["max_lr"]
        for a in alphas:
            rows.append(
                (
                    n,
                    a,
                    empirical_quantile(sims, a),
                    gumbel_threshold(n, a)[1],
                    two_log_n(n),
                    bonferroni_threshold(n, a),
                )
            )
    return ("n", "alpha", "mc", "gumbel", "two_log_n", "bonferroni"), rows


def _e2(p, seed, workers):
    n, minseg = p["n"], p["minseg"]
    model = GaussMeanKnownVar()
    c = empirical_quantile(_null_max(model, n, minseg, p["B"], seed, 1, workers)["max_lr"], p["alpha"])
    out = _null_max(model, n, minseg, p["reps"], seed, 2, workers)
    rows = []
    for r in np.flatnonzero(out["max_lr"] > c):
        tau = int(out["tau_hat"][r])
        rows.append((int(r), tau, tau / n, float(out["max_lr"][r]), c))
    return ("rep", "tau_hat", "tau_frac", "max_lr", "threshold"), rows


def _e3(p, seed, workers):
    rows = []
    for k, n in enumerate(_as_list(p["n"])):
        fracs = _as_list(p["minseg_frac"])
        minsegs = tuple(sorted({max(1, int(round(f * n))) for f in fracs}))
        sampler = SeriesSampler(PiecewiseConstant(n), IidGauss(1.0))
        sims = simulate(sampler, _MaxOverMinsegs(GaussMeanKnownVar(), minsegs), p["B"], seed, 30 + k, workers)
        for f in fracs:
            m = max(1, int(round(f * n)))
            rows.append((n, f, m, p["alpha"], empirical_quantile(sims[f"max_{m}"], p["alpha"])))
    return ("n", "minseg_frac", "minseg", "alpha", "mc_threshold"), rows


def _e4(p, seed, workers):
    n, q0 = p["n"], p["q0"]
    model = GaussMeanKnownVar()
    c = empirical_quantile(_null_max(model, n, 1, p["B"], seed, 1, workers)["max_lr"], p["alpha"])
    tau0 = int(round(q0 * n))
    rows = []
    for k, d in enumerate(_as_list(p["delta"])):
        nu = noncentrality(n, q0, d)
        power = None
        if p["reps"] > 0:
            sampler = SeriesSampler(PiecewiseConstant(n, (tau0,), (0.0, d)), IidGauss(1.0))
            power = float(np.mean(simulate(sampler, MaxLr(model), p["reps"], seed, 100 + k, workers)["max_lr"] > c))
        rows.append((d, nu, c, power_lower_bound(nu, c), power))
    return ("delta", "nu", "threshold", "bound", "empirical_power"), rows


def _e5(p, seed, workers):
    settings = list(zip(_as_list(p["n"]), _as_list(p["delta"])))
    q0 = p["q0"]
    rows = []
    for k, (n, d) in enumerate(settings):
        tau0 = int(round(q0 * n))
        signal = PiecewiseConstant(n, (tau0,), (0.0, d))
        label = f"n={n},delta={d:g}"
        mean_c = np.sqrt(expected_lr_curve(signal, GaussMeanKnownVar()).values)
        # E|N(m, 1)|, the mean of a folded normal
        theo = mean_c * (1 - 2 * stats.norm.cdf(-mean_c)) + np.sqrt(2 / np.pi) * np.exp(-(mean_c**2) / 2)
        for t, v in enumerate(theo, start=1):
            rows.append((label, n, d, "mean", None, t, float(v)))
        sampler = SeriesSampler(signal, IidGauss(1.0))
        paths = simulate(sampler, _CusumPaths(), p["realizations"], seed, 50 + k, workers)["c"]
        for r, path in enumerate(paths):
            for t, v in enumerate(path, start=1):
                rows.append((label, n, d, "realization", r, t, float(v)))
        out = simulate(sampler, MaxLr(GaussMeanKnownVar()), p["reps"], seed, 60 + k, workers)
        for r in range(p["reps"]):
            rows.append((label, n, d, "tau_hat", r, int(out["tau_hat"][r]), math.sqrt(out["max_lr"][r])))
    return ("setting", "n", "delta", "kind", "rep", "tau", "value"), rows


def _e6(p, seed, workers):
    rows = []
    model = GaussMeanKnownVar()
    for k, (n, d) in enumerate(zip(_as_list(p["n"]), _as_list(p["delta"]))):
        c = empirical_quantile(_null_max(model, n, 1, p["B"], seed, 10 + k, workers)["max_lr"], p["alpha"])
        tau0 = int(round(p["q0"] * n))
        sampler = SeriesSampler(PiecewiseConstant(n, (tau0,), (0.0, d)), IidGauss(1.0))
        out = simulate(sampler, MaxLr(model), p["reps"], seed, 20 + k, workers)
        det = out["max_lr"] > c
        dh = out["delta_hat"][det]
        mean_d, mean_abs = float(dh.mean()), float(np.abs(dh).mean())
        rows.append(
            (
                ("i", "ii", "iii", "iv", "v")[k] if k < 5 else str(k + 1),
                n,
                d,
                c,
                float(det.mean()),
                int(det.sum()),
                mean_d,
                100 * (mean_d / d - 1),
                mean_abs,
                100 * (mean_abs / d - 1),
            )
        )
    cols = (
        "scenario",
        "n",
        "delta",
        "threshold",
        "power",
        "detections",
        "mean_delta_hat",
        "bias_pct",
        "mean_abs_delta_hat",
        "abs_bias_pct",
    )
    return cols, rows


E7_SIGNAL = PiecewiseConstant(1000, (200, 450, 700), (0.0, 1.2, 0.4, 0.9))


def _e7(p, seed, workers):
    signal = PiecewiseConstant(p["n"], tuple(p["changepoints"]), tuple(p["levels"]))
    rng = as_generator(seed)
    x = sample_series(signal, IidGauss(1.0), rng)
    f = signal.mean()
    cps = set(signal.changepoints)
    rows = []
    parts = [("full", p["n"])]
    if len(signal.changepoints) >= 2:
        parts.append(("first_two", signal.changepoints[1]))
    model = GaussMeanKnownVar()
    for part, end in parts:
        data = lr_curve(x[:end], model)
        expected = lr_curve(f[:end], model)
        for t in data.taus:
            rows.append((part, int(t), data[t], expected[t], t in cps))
    return ("part", "tau", "lr_data", "lr_expected", "is_changepoint"), rows


def _e8(p, seed, workers):
    n = p["n"]
    model = GaussMeanKnownVar()
    c = empirical_quantile(_null_max(model, n, 1, p["B"], seed, 1, workers)["max_lr"], p["alpha"])
    rows = []
    for k, rho in enumerate(_as_list(p["rho"])):
        infl = ar1_inflation(rho)
        c_infl = c * infl * infl  # the CUSUM threshold scales by infl, LR by its square
        sims = _null_max(model, n, 1, p["reps"], seed, 100 + k, workers, noise=Ar1Noise(rho, 1.0))["max_lr"]
        rows.append((rho, c, infl, c_infl, float(np.mean(sims > c)), float(np.mean(sims > c_infl))))
    return ("rho", "threshold_iid", "inflation", "threshold_inflated", "fpr_naive", "fpr_inflated"), rows


def _e9(p, seed, workers):
    n = p["n"]
    model = GaussMeanKnownVar()
    t_noise = StudentT(p["df"], p["scale"], standardize=p["standardize"])
    rows = []
    edge = p["edge"]
    for k, minseg in enumerate(sorted({1, p["minseg"]})):
        c = empirical_quantile(_null_max(model, n, minseg, p["B"], seed, 10 + k, workers)["max_lr"], p["alpha"])
        for j, (label, noise) in enumerate((("gauss", IidGauss(1.0)), (f"t{p['df']:g}", t_noise))):
            out = _null_max(model, n, minseg, p["reps"], seed, 20 + 2 * k + j, workers, noise=noise)
            det = out["max_lr"] > c
            frac = out["tau_hat"] / n
            near_edge = det & ((frac <= edge) | (frac >= 1 - edge))
            rows.append((label, minseg, c, p["reps"], int(det.sum()), float(det.mean()), float(near_edge.mean())))
    return ("noise", "minseg", "threshold", "reps", "detections", "fpr", "fpr_edge"), rows


def _e10(p, seed, workers):
    n, cp = p["n"], p["changepoint"]
    null = PiecewiseConstant(n, (), (p["null_mean"],))
    alt = PiecewiseConstant(n, (cp,), (p["mean_before"], p["mean_after"]))
    tests = (
        ("poisson", PoissonMean(), False),
        ("gaussian", GaussMeanKnownVar(), True),
    )
    rows = []
    for k, (label, model, ans) in enumerate(tests):
        sims = simulate(SeriesSampler(null, PoissonCounts(), ans), MaxLr(model), p["B"], seed, 10 + k, workers)
        c = empirical_quantile(sims["max_lr"], p["alpha"])
        # both tests see the same alternative datasets (same stream)
        out = simulate(SeriesSampler(alt, PoissonCounts(), ans), MaxLr(model), p["reps"], seed, 20, workers)
        rows.append(("threshold", label, None, c))
        rows.append(("power", label, None, float(np.mean(out["max_lr"] > c))))
        rows.extend(("max_lr", label, r, float(v)) for r, v in enumerate(out["max_lr"]))
        rows.extend(("tau_hat", label, r, int(v)) for r, v in enumerate(out["tau_hat"]))
    # companion: LR curves of both tests on one no-change dataset
    counts = sample_series(PiecewiseConstant(n, (), (p["curve_mean"],)), PoissonCounts(), as_generator(seed))
    curves = (("curve_poisson", lr_curve(counts, PoissonMean())), ("curve_gaussian", lr_curve(anscombe_transform(counts), GaussMeanKnownVar())))
    for label, curve in curves:
        rows.extend((label, "", int(t), curve[t]) for t in curve.taus)
    return ("section", "test", "index", "value"), rows


def _e11(p, seed, workers):
    n, minseg = p["n"], p["minseg"]
    model = GaussMeanAndVar()
    c = empirical_quantile(_null_max(model, n, minseg, p["B"], seed, 1, workers)["max_lr"], p["alpha"])
    out = _null_max(model, n, minseg, p["reps"], seed, 2, workers)
    det = out["max_lr"] > c
    tau = out["tau_hat"][det]
    lo, hi = max(minseg, 2), n - max(minseg, 2)
    edge = (tau <= lo) | (tau >= hi)
    rows = [
        ("summary", "threshold", None, c),
        ("summary", "fpr", None, float(det.mean())),
        ("summary", "detections", None, int(det.sum())),
        ("summary", "edge_fraction", None, float(edge.mean()) if tau.size else None),
    ]
    mid = n // 2
    at = simulate(
        SeriesSampler(PiecewiseConstant(n), IidGauss(1.0)), _LrAtTaus(model, (2, mid), 2), p["qq_reps"], seed, 3, workers
    )
    probs = (np.arange(1, 100) - 0.5) / 99
    ref = stats.chi2.ppf(probs, 2)
    for t in (2, mid):
        emp = np.quantile(at[f"lr_{t}"], probs)
        rows.extend((f"qq_tau_{t}", "", float(x), float(y)) for x, y in zip(ref, emp))
    values, counts = np.unique(tau, return_counts=True)
    rows.extend(("tau_hat", "", int(v), int(k)) for v, k in zip(values, counts))
    return ("section", "label", "x", "y"), rows


def _e12(p, seed, workers):
    n, tau0, d = p["n"], p["tau0"], p["delta"]
    rows = []
    for k, rho in enumerate(_as_list(p["rho"])):
        noise = Ar1Noise(rho, 1.0)
        both = _TwoStats(MaxLr(Ar1MeanKnown(rho)), MaxLr(GaussMeanKnownVar()))
        null = simulate(SeriesSampler(PiecewiseConstant(n), noise), both, p["B"], seed, 100 + k, workers)
        c_lr = empirical_quantile(null["a_max_lr"], p["alpha"])
        c_cu = empirical_quantile(null["b_max_lr"], p["alpha"])
        alt = simulate(SeriesSampler(PiecewiseConstant(n, (tau0,), (0.0, d)), noise), both, p["reps"], seed, 200 + k, workers)
        res = [rho, c_lr, c_cu]
        for key, c in (("a", c_lr), ("b", c_cu)):
            det = alt[f"{key}_max_lr"] > c
            err = np.abs(alt[f"{key}_tau_hat"][det] - tau0)
            res += [float(det.mean()), float(err.mean()) if err.size else None]
        rows.append(tuple(res))
    cols = ("rho", "threshold_lr", "threshold_cusum", "power_lr", "mae_lr", "power_cusum", "mae_cusum")
    return cols, rows


def _e13(p, seed, workers):
    n = p["n"]
    rng = as_generator(seed)
    rows = []
    x = rng.standard_normal(n)
    slope = lr_curve(x, GaussSlopeKnownVar())
    mean = lr_curve(x, GaussMeanKnownVar())
    rows.extend(("smooth", "lr_slope", int(t), slope[t]) for t in slope.taus)
    rows.extend(("smooth", "lr_mean", int(t), mean[t]) for t in mean.taus)
    rows.append(("summary", "roughness_slope", None, curve_roughness(slope.values)))
    rows.append(("summary", "roughness_mean", None, curve_roughness(mean.values)))
    k = p["kink_slope"]
    signals = (
        ("one_kink", PiecewiseLinear(n, 0.0, 0.0, ((n // 2, k),))),
        ("two_kink", PiecewiseLinear(n, 0.0, 0.0, tuple((t, k) for t in p["kinks"]))),
    )
    model = GaussSlopeKnownVar()
    for label, signal in signals:
        data = sample_series(signal, IidGauss(1.0), rng)
        got = lr_curve(data, model)
        exp = expected_lr_curve(signal, model)
        rows.extend((label, "sqrt_lr_data", int(t), math.sqrt(got[t])) for t in got.taus)
        rows.extend((label, "sqrt_lr_expected", int(t), math.sqrt(exp[t])) for t in exp.taus)
        rows.append(("summary", f"{label}_argmax_expected", None, exp.argmax()))
        rows.append(("summary", f"{label}_argmax_data", None, got.argmax()))
    return ("section", "label", "tau", "value"), rows


def _range(lo, hi, kind=float):
    def check(name, v):
        for x in _as_list(v):
            if not isinstance(x, (int, float)) or (kind is int and float(x) != int(x)):
                raise ConfigurationError(f"{name} must be {kind.__name__}, got {x!r}")
            if not lo <= x <= hi:
                raise ConfigurationError(f"{name}={x} outside [{lo}, {hi}]")

    return check


_N = _range(16, 10**7, int)
_REPS = _range(100, 10**8, int)
_ALPHA = _range(1e-6, 0.5)
_PROB = _range(1e-6, 1 - 1e-6)
_RHO = _range(-0.99, 0.99)


def _any(name, v):
    return None


@dataclass(frozen=True)
class _Experiment:
    func: Any
    defaults: dict
    checks: dict
    full_scale: dict = field(default_factory=dict)
    description: str = ""


EXPERIMENTS = {
    "E1": _Experiment(
        _e1,
        {"n": [100, 300, 1000, 3000, 10000], "alpha": [0.05, 0.01, 0.001], "B": 10_000},
        {"n": _N, "alpha": _ALPHA, "B": _REPS},
        {"B": 100_000},
        "null thresholds against n: Monte Carlo, Gumbel, 2 log n, Bonferroni",
    ),
    "E2": _Experiment(
        _e2,
        {"n": 10_000, "alpha": 0.05, "B": 10_000, "reps": 40_000, "minseg": 1},
        {"n": _N, "alpha": _ALPHA, "B": _REPS, "reps": _REPS, "minseg": _range(1, 10**6, int)},
        {"reps": 100_000},
        "locations of false positives under the null",
    ),
    "E3": _Experiment(
        _e3,
        {"n": [100, 1000, 10000], "minseg_frac": [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4], "alpha": 0.01, "B": 10_000},
        {"n": _N, "minseg_frac": _range(0.0, 0.5), "alpha": _ALPHA, "B": _REPS},
        {"B": 100_000},
        "Monte Carlo thresholds against minimum segment length",
    ),
    "E4": _Experiment(
        _e4,
        {"n": 1000, "q0": 0.5, "alpha": 0.01, "B": 10_000, "delta": [round(0.02 * i, 2) for i in range(31)], "reps": 1000},
        {"n": _N, "q0": _PROB, "alpha": _ALPHA, "B": _REPS, "delta": _range(0.0, 100.0), "reps": _range(0, 10**7, int)},
        {"reps": 10_000},
        "lower bound on power against the size of change",
    ),
    "E5": _Experiment(
        _e5,
        {"n": [100, 400, 100], "delta": [1.0, 1.0, 2.0], "q0": 0.4, "realizations": 25, "reps": 1000},
        {"n": _N, "delta": _range(0.0, 100.0), "q0": _PROB, "realizations": _range(1, 10**4, int), "reps": _REPS},
        {"reps": 10_000},
        "CUSUM realisations and location estimates under a change",
    ),
    "E6": _Experiment(
        _e6,
        {"n": [100, 400, 100], "delta": [0.5, 0.5, 1.0], "q0": 0.5, "alpha": 0.05, "B": 10_000, "reps": 10_000},
        {"n": _N, "delta": _range(1e-6, 100.0), "q0": _PROB, "alpha": _ALPHA, "B": _REPS, "reps": _REPS},
        {"reps": 100_000},
        "bias of the estimated size of change after detection",
    ),
    "E7": _Experiment(
        _e7,
        {"n": E7_SIGNAL.n, "changepoints": list(E7_SIGNAL.changepoints), "levels": list(E7_SIGNAL.levels)},
        {"n": _N, "changepoints": _range(1, 10**7, int), "levels": _range(-1e6, 1e6)},
        {},
        "single-change test on data with three changes",
    ),
    "E8": _Experiment(
        _e8,
        {"n": 1000, "rho": [round(0.1 * i, 1) for i in range(1, 10)], "alpha": 0.05, "B": 10_000, "reps": 2000},
        {"n": _N, "rho": _RHO, "alpha": _ALPHA, "B": _REPS, "reps": _REPS},
        {"reps": 10_000},
        "false positives under AR(1) noise, naive and inflated thresholds",
    ),
    "E9": _Experiment(
        _e9,
        {
            "n": 1000,
            "df": 5.0,
            "scale": 1.0,
            "standardize": False,
            "minseg": 25,
            "alpha": 0.05,
            "B": 10_000,
            "reps": 5000,
            "edge": 0.05,
        },
        {
            "n": _N,
            "df": _range(2.0001, 1e6),
            "scale": _range(1e-9, 1e9),
            "standardize": _any,
            "minseg": _range(1, 10**6, int),
            "alpha": _ALPHA,
            "B": _REPS,
            "reps": _REPS,
            "edge": _range(0.0, 0.5),
        },
        {"reps": 20_000},
        "false positives under Student-t noise, with and without a minimum segment length",
    ),
    "E10": _Experiment(
        _e10,
        {
            "n": 1000,
            "changepoint": 500,
            "mean_before": 0.075,
            "mean_after": 0.125,
            "null_mean": 0.1,
            "curve_mean": 1.0,
            "alpha": 0.05,
            "B": 10_000,
            "reps": 1000,
        },
        {
            "n": _N,
            "changepoint": _range(1, 10**7, int),
            "mean_before": _range(1e-9, 1e6),
            "mean_after": _range(1e-9, 1e6),
            "null_mean": _range(1e-9, 1e6),
            "curve_mean": _range(1e-9, 1e6),
            "alpha": _ALPHA,
            "B": _REPS,
            "reps": _REPS,
        },
        {"reps": 10_000},
        "Poisson likelihood ratio against Gaussian test on Anscombe-transformed counts",
    ),
    "E11": _Experiment(
        _e11,
        {"n": 1000, "minseg": 2, "alpha": 0.05, "B": 10_000, "reps": 5000, "qq_reps": 5000},
        {"n": _N, "minseg": _range(2, 10**6, int), "alpha": _ALPHA, "B": _REPS, "reps": _REPS, "qq_reps": _REPS},
        {"reps": 20_000},
        "null behaviour of the change in mean and variance statistic",
    ),
    "E12": _Experiment(
        _e12,
        {"n": 80, "tau0": 20, "delta": 2.0, "rho": [round(0.1 * i, 1) for i in range(10)], "alpha": 0.01, "B": 10_000, "reps": 2000},
        {"n": _range(4, 10**6, int), "tau0": _range(1, 10**6, int), "delta": _range(0.0, 100.0), "rho": _RHO, "alpha": _ALPHA, "B": _REPS, "reps": _REPS},
        {"B": 50_000, "reps": 10_000},
        "AR(1) likelihood ratio against the naive CUSUM, power and accuracy",
    ),
    "E13": _Experiment(
        _e13,
        {"n": 1000, "kinks": [400, 600], "kink_slope": 0.01},
        {"n": _N, "kinks": _range(1, 10**7, int), "kink_slope": _range(-1e3, 1e3)},
        {},
        "change in slope: smoothness of the statistic and two-kink misplacement",
    ),
}


def _resolve(req: ExperimentRequest) -> dict:
    exp_id = req.id.upper()
    if exp_id not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment {req.id!r}; choose from {', '.join(EXPERIMENTS)}")
    exp = EXPERIMENTS[exp_id]
    params = dict(exp.defaults)
    if req.full_scale:
        params.update(exp.full_scale)
    for key, value in req.overrides.items():
        if key not in exp.checks:
            raise ConfigurationError(f"{exp_id} has no parameter {key!r}; allowed: {', '.join(exp.checks)}")
        exp.checks[key](key, value)
        params[key] = value
    return params


def run_experiment(req: ExperimentRequest) -> ResultTable:
    params = _resolve(req)
    exp_id = req.id.upper()
    columns, rows = EXPERIMENTS[exp_id].func(params, req.seed, req.workers)
    footer = {
        "experiment": exp_id,
        "seed": req.seed,
        "params": json.dumps(params, sort_keys=True),
        "code_version": __version__,
    }
    return ResultTable(columns, rows, footer)
