"""Replication harness for coverage, size and power of the EL procedures.

Replicate ``i`` draws its path from ``SeedSequence(seed, spawn_key=(i,))``,
so serial and parallel runs produce identical summaries.
"""

from __future__ import annotations

import configparser
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.integrate import quad

from .elcore import normalize_variant
from .estimating import EstimatingSystem, parse_system
from .exceptions import FDELError, InvalidInputError, InvalidRequestError, NumericalFailure
from .inference import (
    chi_square_quantile,
    confidence_region,
    profile_objective,
    test_gof_composite,
    test_gof_simple,
    test_moment_validity,
    test_parameter,
    test_profile,
)
from .models import SpectralModel, get_family, ma_weights, parse_model, simulate_gaussian, simulate_linear
from .spectral import periodogram

__all__ = [
    "ExperimentSpec",
    "ExperimentSummary",
    "PROCEDURES",
    "truth_of",
    "replicate_seed",
    "simulate_replicate",
    "run_experiment",
    "parse_experiments",
]

DEGRADED_FRACTION = 0.05


@dataclass(frozen=True)
class ExperimentSpec:
    """One Monte Carlo experiment.

    ``alpha`` is the nominal test size; coverage procedures use level
    ``1 - alpha``. ``options`` carries procedure-specific settings
    (``family``, ``f0``, ``f0_scale``, ``fixed``, ``restarts``).
    """

    model: SpectralModel
    n: int
    reps: int
    procedure: Union[str, Callable]
    system: str = None
    variant: str = "plain"
    alpha: float = 0.05
    seed: int = 0
    theta0: tuple = None
    innovations: str = "gaussian"
    name: str = "experiment"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.reps < 100:
            raise InvalidInputError("an experiment needs at least 100 replicates")
        if self.n < 64:
            raise InvalidInputError("an experiment needs n >= 64")
        if not 0 < self.alpha < 1:
            raise InvalidInputError("alpha must lie in (0, 1)")
        if isinstance(self.procedure, str) and self.procedure not in PROCEDURES:
            raise InvalidInputError(f"unknown procedure {self.procedure!r}")


@dataclass
class ExperimentSummary:
    name: str
    metric: str
    rate: float
    se: float
    reps: int
    used: int
    failures: int
    stat_mean: float
    stat_var: float
    degraded: bool
    wall_clock: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return None
            return v
        out = {k: clean(getattr(self, k)) for k in
               ("name", "metric", "rate", "se", "reps", "used", "failures",
                "stat_mean", "stat_var", "degraded", "wall_clock")}
        out.update({k: clean(v) for k, v in self.details.items()})
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def replicate_seed(base_seed: int, i: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(base_seed), spawn_key=(int(i),))


def simulate_replicate(spec: ExperimentSpec, i: int) -> np.ndarray:
    seed = replicate_seed(spec.seed, i)
    if spec.innovations == "gaussian":
        return simulate_gaussian(spec.model, spec.n, seed)
    m = int(spec.options.get("ma_terms", 500))
    b = ma_weights(spec.model, m)
    return simulate_linear(b, spec.n, seed, variance=spec.model.variance, innovations=spec.innovations)


# ---------------------------------------------------------------------------
# true parameter values
# ---------------------------------------------------------------------------


def _spectral_cdf(model, tau):
    alpha = model.memory_exponent
    if alpha > 0:
        # density * l^alpha is continuous at 0; keep the rule off the pole itself
        val, _ = quad(lambda l: model.density(max(l, 1e-12)) * max(l, 1e-12) ** alpha, 0.0, tau, weight="alg",
                      wvar=(-alpha, 0.0), limit=400)
    else:
        val, _ = quad(model.density, 0.0, tau, limit=400)
    return val


def truth_of(model: SpectralModel, system) -> np.ndarray:
    """True parameter of ``system`` under ``model``.

    Autocorrelations come from the autocovariance, spectral-distribution
    ratios from quadrature and Whittle parameters from the model itself.
    """
    if isinstance(system, str):
        system = parse_system(system)
    kind = system.name.partition(":")[0]
    if system.p == 0:
        return np.empty(0)
    if kind == "acf":
        lags = list(system.args)
        r = model.autocovariance(max(lags))
        return r[lags] / r[0]
    if kind == "acf-ar1":
        r = model.autocovariance(1)
        return np.array([r[1] / r[0]])
    if kind == "cdf":
        taus = list(system.args)
        total = _spectral_cdf(model, np.pi)
        return np.array([_spectral_cdf(model, t) / total for t in taus])
    if kind in ("whittle", "whittle-nf", "gof-composite"):
        fam = system.family
        shape = _family_shape(fam.name, model)
        if kind == "whittle-nf":
            return shape
        return np.r_[model.variance, shape]
    raise InvalidRequestError(f"no known truth for system {system.name!r} under {model.describe()}")


def _family_shape(name, model):
    if name == "white" and model.kind == "white":
        return np.empty(0)
    if name == "ar1" and model.kind == "ar1":
        return np.array(model.ar)
    if name == "farima" and model.kind == "farima" and not model.ar and not model.ma:
        return np.array([model.d])
    if name.startswith("arma(") and model.kind in ("arma", "ar1", "white"):
        p, q = (int(v) for v in name[5:-1].split(","))
        if len(model.ar) <= p and len(model.ma) <= q:
            return np.r_[np.pad(model.ar, (0, p - len(model.ar))), np.pad(model.ma, (0, q - len(model.ma)))]
    raise InvalidRequestError(f"model {model.describe()} is not a member of family {name!r}")


# ---------------------------------------------------------------------------
# procedures: (x, spec, context) -> (outcome, statistic)
# ---------------------------------------------------------------------------


def _system(spec):
    if isinstance(spec.system, EstimatingSystem):
        return spec.system
    if spec.system is None:
        raise InvalidInputError(f"procedure {spec.procedure!r} needs a system")
    return parse_system(spec.system)


def _theta0(spec, system):
    if spec.theta0 is not None:
        return np.asarray(spec.theta0, dtype=float)
    return truth_of(spec.model, system)


def _proc_coverage(x, spec, ctx):
    pg = periodogram(x)
    stat = profile_objective(ctx["system"], pg, spec.variant)(ctx["theta0"])
    return stat <= ctx["cutoff"], stat


def _proc_region(x, spec, ctx):
    pg = periodogram(x)
    reg = confidence_region(ctx["system"], pg, spec.variant, level=1 - spec.alpha)
    t0 = float(ctx["theta0"][0])
    covered = any(lo <= t0 <= hi for lo, hi in reg.intervals)
    return covered, reg.offset


def _proc_parameter(x, spec, ctx):
    simple, _ = test_parameter(ctx["system"], periodogram(x), ctx["theta0"], spec.variant, spec.alpha)
    return simple.reject, simple.statistic


def _proc_moment(x, spec, ctx):
    rep = test_moment_validity(ctx["system"], periodogram(x), spec.variant, spec.alpha,
                               restarts=int(spec.options.get("restarts", 3)))
    return rep.reject, rep.statistic


def _proc_profile(x, spec, ctx):
    fixed = spec.options.get("fixed")
    if fixed is None:
        fixed = {0: float(ctx["theta0"][0])}
    rep = test_profile(ctx["system"], periodogram(x), fixed, spec.variant, spec.alpha,
                       restarts=int(spec.options.get("restarts", 3)))
    return rep.reject, rep.statistic


def _proc_gof_simple(x, spec, ctx):
    rep = test_gof_simple(ctx["f0"], periodogram(x), spec.alpha)
    return rep.reject, rep.statistic


def _proc_gof_composite(x, spec, ctx):
    rep = test_gof_composite(ctx["family"], periodogram(x), spec.alpha,
                             restarts=int(spec.options.get("restarts", 3)))
    return rep.reject, rep.statistic


PROCEDURES = {
    "coverage": ("coverage", _proc_coverage),
    "region": ("coverage", _proc_region),
    "parameter": ("rejection", _proc_parameter),
    "moment": ("rejection", _proc_moment),
    "profile": ("rejection", _proc_profile),
    "gof-simple": ("rejection", _proc_gof_simple),
    "gof-composite": ("rejection", _proc_gof_composite),
}


def _context(spec):
    ctx = {}
    proc = spec.procedure
    if proc in ("coverage", "region", "parameter", "moment", "profile"):
        system = _system(spec)
        ctx["system"] = system
        if proc != "moment":
            ctx["theta0"] = _theta0(spec, system)
        ctx["cutoff"] = chi_square_quantile(system.r, 1 - spec.alpha)
    elif proc == "gof-simple":
        f0 = spec.options.get("f0")
        model = parse_model(f0) if isinstance(f0, str) else (f0 or spec.model)
        scale = float(spec.options.get("f0_scale", 1.0))
        ctx["f0"] = model if scale == 1.0 else (lambda lam, m=model, c=scale: c * m.density(lam))
    elif proc == "gof-composite":
        ctx["family"] = get_family(spec.options.get("family", "ar1"))
    return ctx


def _run_one(spec, ctx, fn, i):
    try:
        x = simulate_replicate(spec, i)
        outcome, stat = fn(x, spec, ctx)
        return i, bool(outcome), float(stat), None
    except (NumericalFailure, InvalidRequestError) as exc:
        return i, None, math.nan, f"{type(exc).__name__}: {exc}"


def _run_chunk(args):
    spec, idx = args
    metric, fn = _resolve(spec)
    ctx = _context(spec) if isinstance(spec.procedure, str) else {}
    return [_run_one(spec, ctx, fn, i) for i in idx]


def _resolve(spec):
    if callable(spec.procedure):
        return spec.options.get("metric", "rejection"), spec.procedure
    return PROCEDURES[spec.procedure]


def run_experiment(spec: ExperimentSpec, n_jobs: int = 1) -> ExperimentSummary:
    """Run ``spec.reps`` replicates and summarise the outcome rate.

    Failed replicates (numerical failures) are excluded from the rate and
    counted; more than 5% failures marks the summary ``degraded``.
    """
    start = time.perf_counter()
    metric, fn = _resolve(spec)
    idx = list(range(spec.reps))
    if n_jobs == 1:
        ctx = _context(spec) if isinstance(spec.procedure, str) else {}
        rows = [_run_one(spec, ctx, fn, i) for i in idx]
    else:
        chunks = [idx[k::n_jobs] for k in range(n_jobs)]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            rows = [row for part in pool.map(_run_chunk, [(spec, c) for c in chunks]) for row in part]
    rows.sort(key=lambda row: row[0])
    ok = [row for row in rows if row[1] is not None]
    failures = len(rows) - len(ok)
    used = len(ok)
    rate = sum(row[1] for row in ok) / used if used else math.nan
    se = math.sqrt(rate * (1 - rate) / used) if used else math.nan
    stats = np.array([row[2] for row in ok])
    finite = stats[np.isfinite(stats)]
    details = {
        "procedure": spec.procedure if isinstance(spec.procedure, str) else getattr(spec.procedure, "__name__", "custom"),
        "model": spec.model.describe(),
        "n": spec.n,
        "alpha": spec.alpha,
        "seed": spec.seed,
        "variant": spec.variant,
        "infinite_statistics": int(stats.size - finite.size),
        "stat_q95": float(np.quantile(stats, 0.95)) if stats.size else math.nan,
    }
    if spec.system is not None:
        details["system"] = spec.system if isinstance(spec.system, str) else spec.system.name
    errors = [row[3] for row in rows if row[3] is not None]
    if errors:
        details["first_error"] = errors[0]
    return ExperimentSummary(
        name=spec.name, metric=metric, rate=rate, se=se, reps=spec.reps, used=used,
        failures=failures,
        stat_mean=float(finite.mean()) if finite.size else math.nan,
        stat_var=float(finite.var(ddof=1)) if finite.size > 1 else math.nan,
        degraded=failures > DEGRADED_FRACTION * spec.reps,
        wall_clock=time.perf_counter() - start,
        details=details,
    )


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------


class ConfigError(InvalidInputError):
    """Malformed experiment configuration; message names the section."""


_KNOWN_KEYS = {"model", "n", "reps", "procedure", "system", "variant", "alpha", "level", "seed",
               "theta0", "innovations", "family", "f0", "f0_scale", "fixed", "restarts", "ma_terms"}


def parse_experiments(text: str) -> list:
    """Parse ``[name]`` sections of ``key = value`` lines into specs."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse experiment config: {exc}") from None
    specs = []
    for name in parser.sections():
        sec = parser[name]
        unknown = set(sec) - _KNOWN_KEYS
        if unknown:
            raise ConfigError(f"[{name}]: unknown keys {sorted(unknown)}")
        try:
            for key in ("model", "n", "reps", "procedure", "seed"):
                if key not in sec:
                    raise ConfigError(f"[{name}]: missing required key {key!r}")
            if "alpha" in sec:
                alpha = float(sec["alpha"])
            elif "level" in sec:
                alpha = 1.0 - float(sec["level"])
            else:
                alpha = 0.05
            options = {}
            for key in ("family", "f0"):
                if key in sec:
                    options[key] = sec[key]
            for key in ("f0_scale",):
                if key in sec:
                    options[key] = float(sec[key])
            for key in ("restarts", "ma_terms"):
                if key in sec:
                    options[key] = int(sec[key])
            if "fixed" in sec:
                options["fixed"] = {int(k): float(v) for k, v in
                                    (item.split("=") for item in sec["fixed"].split(","))}
            theta0 = None
            if "theta0" in sec and sec["theta0"].strip().lower() != "truth":
                theta0 = tuple(float(v) for v in sec["theta0"].split(","))
            variant = normalize_variant(sec.get("variant", "plain"))
            spec = ExperimentSpec(
                model=parse_model(sec["model"]), n=int(sec["n"]), reps=int(sec["reps"]),
                procedure=sec["procedure"].strip(), system=sec.get("system"), variant=variant,
                alpha=alpha, seed=int(sec["seed"]), theta0=theta0,
                innovations=sec.get("innovations", "gaussian"), name=name, options=options,
            )
            if spec.system is not None:
                parse_system(spec.system)
        except ConfigError:
            raise
        except (ValueError, FDELError) as exc:
            raise ConfigError(f"[{name}]: {exc}") from None
        specs.append(spec)
    return specs
