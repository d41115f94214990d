"""Command-line interface.

Subcommands: ``detect``, ``calibrate``, ``simulate``, ``experiment`` and
``estimate-sigma``.  Exit status is 0 on success, 2 for I/O errors, 3 for
invalid flags and 4 for data the requested statistic cannot handle.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from ._rng import fresh_seed
from .calibration import (
    BonferroniExact,
    Fixed,
    GumbelAsymptotic,
    MonteCarlo,
    TwoLogN,
    resolve_threshold,
)
from .core import ConfigurationError, DegenerateInputError, InvalidSeriesError, TimeSeries
from .detector import DetectionConfig, detect
from .models import (
    Ar1MeanKnown,
    GaussMeanAndVar,
    GaussMeanKnownVar,
    GaussMeanUnknownVar,
    GaussSlopeKnownVar,
    GaussVarKnownMean,
    PoissonMean,
)
from .noise import Ar1Noise, IidGauss, PiecewiseConstant, PoissonCounts, StudentT, gen_series, mad_sigma

EXIT_IO = 2
EXIT_FLAGS = 3
EXIT_DATA = 4

MODELS = ("mean-known-var", "mean-unknown-var", "poisson", "var-known-mean", "mean-and-var", "slope", "ar1-mean")
RULES = ("mc", "gumbel", "bonferroni", "two-log-n", "fixed")
NOISES = ("gauss", "ar1", "t", "poisson")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class _Fmt:
    def __init__(self, precision):
        self.p = precision

    def __call__(self, v):
        if v is None:
            return "NA"
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{float(v):.{self.p}g}"


def read_series(path) -> TimeSeries:
    """Single-column CSV, one value per line, optional header ``x``."""
    try:
        fh = sys.stdin if path == "-" else open(path, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    values = []
    with fh:
        for lineno, line in enumerate(fh, start=1):
            field = line.strip()
            if not field:
                continue
            if lineno == 1 and field.strip('"').lower() == "x":
                continue
            try:
                v = float(field)
            except ValueError:
                raise InvalidSeriesError(f"line {lineno}: cannot parse {field!r} as a number") from None
            if not math.isfinite(v):
                raise InvalidSeriesError(f"line {lineno}: non-finite value {field!r}")
            values.append(v)
    return TimeSeries(np.array(values))


def write_series(x, path, fmt):
    lines = "x\n" + "".join(fmt(float(v)) + "\n" for v in x)
    _write(lines, path)


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def build_model(args):
    name = args.model
    if name in ("mean-known-var", "slope"):
        if args.sigma is None:
            raise ConfigurationError(f"--sigma is required for --model {name}")
        return GaussMeanKnownVar(args.sigma) if name == "mean-known-var" else GaussSlopeKnownVar(args.sigma)
    if name == "var-known-mean":
        if args.mu is None:
            raise ConfigurationError("--mu is required for --model var-known-mean")
        return GaussVarKnownMean(args.mu)
    if name == "ar1-mean":
        if args.phi is None:
            raise ConfigurationError("--phi is required for --model ar1-mean")
        return Ar1MeanKnown(args.phi)
    return {"mean-unknown-var": GaussMeanUnknownVar, "poisson": PoissonMean, "mean-and-var": GaussMeanAndVar}[name]()


def _check_model_flags(args):
    # flags that the chosen model ignores are a usage error, not silently dropped
    used = {"mean-known-var": "sigma", "slope": "sigma", "var-known-mean": "mu", "ar1-mean": "phi"}
    for flag in ("sigma", "mu", "phi"):
        if getattr(args, flag) is not None and used.get(args.model) != flag:
            raise ConfigurationError(f"--{flag} does not apply to --model {args.model}")


def build_rule(args, seed):
    if args.rule == "fixed":
        if args.threshold is None:
            raise ConfigurationError("--rule fixed needs --threshold")
        return Fixed(args.threshold)
    if args.threshold is not None:
        raise ConfigurationError("--threshold only applies to --rule fixed")
    if args.rule == "two-log-n":
        return TwoLogN()
    if args.rule == "gumbel":
        return GumbelAsymptotic(args.alpha)
    if args.rule == "bonferroni":
        return BonferroniExact(args.alpha)
    return MonteCarlo(args.reps, args.alpha, seed, args.null_mean)


def _seed(args, err):
    if args.seed is not None:
        return args.seed
    seed = fresh_seed()
    print(f"seed={seed}", file=err)
    return seed


def _default_minseg(args):
    if args.minseg is not None:
        return args.minseg
    return 2 if args.model == "mean-and-var" else 1


def _record(pairs, fmt):
    return "".join(f"{k}={fmt(v) if not isinstance(v, str) else v}\n" for k, v in pairs)


def cmd_detect(args, out, err):
    _check_model_flags(args)
    model = build_model(args)
    ts = read_series(args.input)
    minseg = _default_minseg(args)
    seed = _seed(args, err) if args.rule == "mc" else None
    rule = build_rule(args, seed)
    if args.null_mean is None and isinstance(model, PoissonMean) and isinstance(rule, MonteCarlo):
        rule = MonteCarlo(rule.B, rule.alpha, rule.seed, float(np.mean(ts.values)))
    config = DetectionConfig.from_rule(model, rule, ts.n, minseg)
    res = detect(ts, config)
    fmt = _Fmt(args.precision)
    pairs = [
        ("detected", res.detected),
        ("tau_hat", res.tau_hat),
        ("max_lr", res.max_lr),
    ]
    if res.delta_hat is not None:
        pairs.append(("delta_hat", res.delta_hat))
    pairs += [("threshold", res.threshold), ("model", model.name), ("n", ts.n), ("minseg", minseg)]
    if seed is not None:
        pairs.append(("seed", seed))
    out.write(_record(pairs, fmt))
    return 0


def cmd_calibrate(args, out, err):
    _check_model_flags(args)
    model = build_model(args)
    if args.n is None:
        raise ConfigurationError("--n is required")
    minseg = _default_minseg(args)
    seed = _seed(args, err) if args.rule == "mc" else None
    if args.rule == "mc" and isinstance(model, PoissonMean) and args.null_mean is None:
        raise ConfigurationError("--null-mean is required to calibrate the Poisson model")
    rule = build_rule(args, seed)
    c = resolve_threshold(rule, model, args.n, minseg)
    pairs = [("threshold", c), ("rule", args.rule), ("model", model.name), ("n", args.n), ("minseg", minseg)]
    if args.rule != "two-log-n" and args.rule != "fixed":
        pairs.append(("alpha", args.alpha))
    if seed is not None:
        pairs += [("reps", args.reps), ("seed", seed)]
    out.write(_record(pairs, _Fmt(args.precision)))
    return 0


def _parse_floats(text, flag):
    if text is None or text == "":
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigurationError(f"{flag} must be a comma-separated list of numbers") from None


def cmd_simulate(args, out, err):
    if args.n is None:
        raise ConfigurationError("--n is required")
    cps = tuple(int(v) if v == int(v) else v for v in _parse_floats(args.changepoints, "--changepoints"))
    if any(not isinstance(v, int) for v in cps):
        raise ConfigurationError("--changepoints must be integers")
    levels = _parse_floats(args.levels, "--levels") or (0.0,) * (len(cps) + 1)
    signal = PiecewiseConstant(args.n, cps, levels)
    sigma = 1.0 if args.sigma is None else args.sigma
    if args.noise == "gauss":
        noise = IidGauss(sigma)
    elif args.noise == "ar1":
        if args.phi is None:
            raise ConfigurationError("--noise ar1 needs --phi")
        noise = Ar1Noise(args.phi, sigma)
    elif args.noise == "t":
        noise = StudentT(args.df, sigma)
    else:
        noise = PoissonCounts()
    seed = _seed(args, err)
    ts = gen_series(signal, noise, seed)
    write_series(ts.values, args.output, _Fmt(args.precision))
    return 0


def _parse_override(text):
    if "=" not in text:
        raise ConfigurationError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def cmd_experiment(args, out, err):
    from .experiments import ExperimentRequest, run_experiment

    overrides = dict(_parse_override(s) for s in args.set or ())
    seed = _seed(args, err)
    req = ExperimentRequest(args.id, overrides, seed, args.full_scale)
    table = run_experiment(req)
    _write(table.to_csv(), args.output)
    return 0


def cmd_estimate_sigma(args, out, err):
    ts = read_series(args.input)
    est = mad_sigma(ts)
    if est.degenerate:
        print("warning: median absolute deviation of the differences is zero; sigma estimate is 0", file=err)
    out.write(_record([("sigma", est.sigma), ("degenerate", est.degenerate), ("n", ts.n)], _Fmt(args.precision)))
    return 0


def _model_flags(p, rule=True):
    p.add_argument("--model", choices=MODELS, default="mean-known-var")
    p.add_argument("--sigma", type=float, help="noise sd (known-variance models)")
    p.add_argument("--mu", type=float, help="known mean (var-known-mean)")
    p.add_argument("--phi", type=float, help="AR(1) coefficient (ar1-mean)")
    p.add_argument("--minseg", type=int, help="minimum segment length (default 1, or 2 for mean-and-var)")
    if rule:
        p.add_argument("--rule", choices=RULES, default="mc")
        p.add_argument("--alpha", type=float, default=0.05)
        p.add_argument("--reps", type=int, default=10_000, help="Monte Carlo replicates")
        p.add_argument("--threshold", type=float, help="cutoff for --rule fixed")
        p.add_argument("--null-mean", type=float, help="null rate for Poisson Monte Carlo")


def _common(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--precision", type=int, default=6, help="significant digits in output")


def build_parser():
    parser = _Parser(prog="singlecp", description="Single change-point detection with likelihood-ratio tests.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="test a series for a single change")
    p.add_argument("--input", required=True, help="single-column CSV, '-' for stdin")
    _model_flags(p)
    _common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("calibrate", help="compute a test threshold")
    p.add_argument("--n", type=int, help="series length")
    _model_flags(p)
    _common(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="generate a piecewise-constant series")
    p.add_argument("--n", type=int)
    p.add_argument("--changepoints", help="comma-separated, e.g. 50,120")
    p.add_argument("--levels", help="comma-separated segment means")
    p.add_argument("--noise", choices=NOISES, default="gauss")
    p.add_argument("--sigma", type=float, help="noise sd, or the scale of t noise (default 1)")
    p.add_argument("--phi", type=float, help="AR(1) coefficient for --noise ar1")
    p.add_argument("--df", type=float, default=5.0, help="degrees of freedom for --noise t")
    p.add_argument("--output", help="output CSV (default stdout)")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a simulation study and write its table")
    p.add_argument("id", help="E1 to E13")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a parameter (JSON value)")
    p.add_argument("--full-scale", action="store_true", help="use the larger replicate counts")
    p.add_argument("--output", help="output CSV (default stdout)")
    _common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("estimate-sigma", help="robust noise sd from first differences")
    p.add_argument("--input", required=True)
    _common(p)
    p.set_defaults(func=cmd_estimate_sigma)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "precision", 6) < 1:
            raise ConfigurationError("--precision must be >= 1")
        return args.func(args, out, err)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_FLAGS
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_IO
    except (InvalidSeriesError, DegenerateInputError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_DATA
    except ConfigurationError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_FLAGS


if __name__ == "__main__":
    sys.exit(main())
