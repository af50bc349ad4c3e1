"""``fdel`` command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure (or a degraded
Monte Carlo experiment).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .elcore import normalize_variant
from .estimating import parse_system
from .exceptions import ConfigurationError, FDELError, InvalidInputError, InvalidRequestError, NumericalFailure
from .inference import (
    confidence_region,
    mele,
    test_gof_composite,
    test_gof_simple,
    test_moment_validity,
    test_parameter,
)
from .models import get_family, ma_weights, parse_model, simulate_gaussian, simulate_linear
from .montecarlo import parse_experiments, run_experiment
from .spectral import as_series, periodogram
from .validation import default_variant

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_VALUE_FLAGS = ("--bounds", "--theta", "--init")


def read_series(path) -> np.ndarray:
    """Read one decimal number per line; a single non-numeric header is skipped."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    values = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        if len(text.replace(",", " ").replace(";", " ").split()) > 1:
            raise InvalidInputError(f"{path}:{lineno}: expected a single column, got {raw!r}")
        try:
            values.append(float(text))
        except ValueError:
            if lineno == 1 and not values:
                continue
            raise InvalidInputError(f"{path}:{lineno}: not a number: {raw!r}") from None
    try:
        return as_series(values)
    except InvalidInputError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None


def _floats(text, what):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InvalidInputError(f"bad {what}: {text!r}") from None


def _bounds(text, p):
    if text is None:
        return None
    parts = [s for s in text.split(";") if s.strip()]
    out = []
    for part in parts:
        vals = _floats(part, "bounds")
        if len(vals) != 2 or not vals[0] < vals[1]:
            raise InvalidInputError(f"bounds must be lo,hi with lo < hi: {part!r}")
        out.append(tuple(vals))
    if len(out) != p:
        raise InvalidInputError(f"expected {p} bound pairs separated by ';', got {len(out)}")
    return out


def _variant(system, requested):
    if requested and requested != "auto":
        return normalize_variant(requested)
    return default_variant(system)


def _emit(payload, out):
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _load(args):
    x = read_series(args.input)
    system = parse_system(args.system)
    return x, periodogram(x), system


def cmd_analyze(args):
    x, pg, system = _load(args)
    variant = _variant(system, args.variant)
    alpha = round(1.0 - args.level, 12)
    bounds = _bounds(args.bounds, system.p)
    tests = []
    fit = None
    if system.p > 0 and (args.theta is not None or system.r > system.p):
        fit = mele(system, pg, variant, bounds=bounds, restarts=args.restarts)
    if args.theta is not None:
        theta = _floats(args.theta, "theta")
        if len(theta) != system.p:
            raise InvalidInputError(f"--theta needs {system.p} values for {system.name}")
        simple, lr = test_parameter(system, pg, theta, variant, alpha, mele_result=fit)
        tests.append(simple.to_dict())
        if lr is not None:
            tests.append(lr.to_dict())
    elif system.p == 0:
        simple, _ = test_parameter(system, pg, [], variant, alpha)
        tests.append(simple.to_dict())
    if system.r > system.p and system.p > 0:
        tests.append(test_moment_validity(system, pg, variant, alpha, mele_result=fit).to_dict())
    if not tests:
        raise InvalidRequestError("nothing to test: pass --theta for a just-identified system")
    payload = {"command": "analyze", "system": system.name, "n": int(x.size), "variant": variant,
               "tests": tests}
    if fit is not None:
        payload["mele"] = fit.to_dict()
    _emit(payload, args.out)


def cmd_mele(args):
    x, pg, system = _load(args)
    if system.p == 0:
        raise InvalidRequestError(f"system {system.name} has no parameters to estimate")
    variant = _variant(system, args.variant)
    init = _floats(args.init, "init") if args.init else None
    res = mele(system, pg, variant, theta_init=init, bounds=_bounds(args.bounds, system.p),
               restarts=args.restarts)
    payload = res.to_dict()
    payload.update({"command": "mele", "n": int(x.size)})
    _emit(payload, args.out)


def cmd_region(args):
    x, pg, system = _load(args)
    variant = _variant(system, args.variant)
    reg = confidence_region(system, pg, variant, level=args.level,
                            bounds=_bounds(args.bounds, system.p), resolution=args.resolution,
                            restarts=args.restarts)
    payload = reg.to_dict()
    payload.update({"command": "region", "system": system.name, "n": int(x.size), "variant": variant})
    _emit(payload, args.out)


def cmd_gof(args):
    x = read_series(args.input)
    pg = periodogram(x)
    alpha = round(1.0 - args.level, 12)
    if (args.f0 is None) == (args.family is None):
        raise InvalidInputError("gof needs exactly one of --f0 or --family")
    if args.f0 is not None:
        rep = test_gof_simple(parse_model(args.f0), pg, alpha)
    else:
        rep = test_gof_composite(get_family(args.family), pg, alpha, restarts=args.restarts)
    payload = rep.to_dict()
    payload.update({"command": "gof", "n": int(x.size)})
    _emit(payload, args.out)


def cmd_simulate(args):
    model = parse_model(args.model)
    if args.n < 1:
        raise InvalidInputError("--n must be positive")
    if args.innovations == "gaussian":
        x = simulate_gaussian(model, args.n, args.seed)
    else:
        x = simulate_linear(ma_weights(model, args.ma_terms), args.n, args.seed,
                            variance=model.variance, innovations=args.innovations)
    text = "".join(f"{v:.17g}\n" for v in x)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_experiment(args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {args.config}: {exc}") from None
    specs = parse_experiments(text)
    lines = []
    degraded = False
    for spec in specs:
        summary = run_experiment(spec, n_jobs=args.jobs)
        d = summary.to_dict()
        if not args.timing:
            d.pop("wall_clock")
        lines.append(json.dumps(d, sort_keys=True))
        degraded |= summary.degraded
    text = "".join(line + "\n" for line in lines)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_NUMERICAL if degraded else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdel", description="Frequency-domain empirical likelihood for stationary time series.")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--in", dest="input", required=True, help="one observation per line")
        p.add_argument("--out", help="write JSON here instead of stdout")
        p.add_argument("--restarts", type=int, default=3, help="random Nelder-Mead restarts")
        return p

    for name, help_ in (("analyze", "parameter / moment tests"), ("mele", "maximum EL estimate"),
                        ("region", "confidence region")):
        p = data_cmd(name, help_)
        p.add_argument("--system", required=True, help="e.g. acf:1, cdf:0.5, whittle-nf:ar1")
        p.add_argument("--variant", default="auto",
                       choices=["auto", "plain", "mean_corrected", "squared_moment"])
        p.add_argument("--bounds", help="lo,hi[;lo,hi...] search bounds")
        p.add_argument("--level", type=float, default=0.95, help="confidence level")
        if name == "analyze":
            p.add_argument("--theta", help="hypothesised parameter, comma separated")
        if name == "mele":
            p.add_argument("--init", help="starting value, comma separated")
        if name == "region":
            p.add_argument("--resolution", type=int, default=None)

    p = data_cmd("gof", "goodness-of-fit test")
    p.add_argument("--f0", help="simple null density, e.g. white:1.0 or ar1(0.5,1)")
    p.add_argument("--family", help="composite null family, e.g. ar1, white, farima")
    p.add_argument("--level", type=float, default=0.95)

    p = sub.add_parser("simulate", help="simulate a model path")
    p.add_argument("--model", required=True, help="e.g. farima(0,0.3,0;var=1), fgn(0.7,1)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--innovations", default="gaussian", choices=["gaussian", "chi2"])
    p.add_argument("--ma-terms", type=int, default=500, help="truncation for non-Gaussian paths")

    p = sub.add_parser("experiment", help="run Monte Carlo experiments from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="include wall-clock time (not reproducible)")
    return parser


COMMANDS = {
    "analyze": cmd_analyze,
    "mele": cmd_mele,
    "region": cmd_region,
    "gof": cmd_gof,
    "simulate": cmd_simulate,
    "experiment": cmd_experiment,
}


def _join_values(argv):
    # let "--bounds -0.99,0.99" through argparse's negative-number heuristic
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_join_values(argv))
    if getattr(args, "level", None) is not None and not 0 < args.level < 1:
        print("fdel: error: --level must lie in (0, 1)", file=sys.stderr)
        return EXIT_INPUT
    try:
        code = COMMANDS[args.command](args)
    except (InvalidInputError, InvalidRequestError, ConfigurationError) as exc:
        print(f"fdel: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"fdel: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FDELError as exc:
        print(f"fdel: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
