"""Estimation, tests and confidence regions built on the log EL ratio.

Statistics are compared with chi-square limits: ``ell(theta_0)`` against
``chi2_r``, ``ell(theta_0) - ell(theta_hat)`` against ``chi2_p`` and
``ell(theta_hat)`` against ``chi2_{r-p}``.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import gammainc, gammaincc

from .elcore import DEFAULT_CONFIG, ELConfig, log_el_ratio, normalize_variant
from .estimating import EstimatingSystem, gof_composite_system, gof_simple_system
from .exceptions import (
    EstimationFailure,
    InvalidInputError,
    InvalidRequestError,
    NumericalFailure,
)

__all__ = [
    "KAPPA4_WARNING",
    "MeleResult",
    "TestReport",
    "ConfidenceRegion",
    "chi_square_cdf",
    "chi_square_sf",
    "chi_square_quantile",
    "profile_objective",
    "mele",
    "test_parameter",
    "test_moment_validity",
    "test_constrained",
    "test_profile",
    "confidence_region",
    "test_gof_simple",
    "test_gof_composite",
]

KAPPA4_WARNING = (
    "estimating system has a nonzero spectral mean M; the chi-square calibration "
    "requires a zero fourth-order innovation cumulant (e.g. Gaussian data)"
)
GAUSSIAN_WARNING = "composite goodness-of-fit calibration assumes a Gaussian series"
INFEASIBLE_WARNING = "hypothesised value lies outside the convex-hull feasible set"


# ---------------------------------------------------------------------------
# chi-square calibration
# ---------------------------------------------------------------------------


def chi_square_cdf(x, df):
    """Regularised lower incomplete gamma ``P(df/2, x/2)``."""
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return float(gammainc(df / 2.0, x / 2.0))


def chi_square_sf(x, df):
    """Upper tail probability; 0 for an infinite statistic."""
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return float(gammaincc(df / 2.0, x / 2.0))


def chi_square_quantile(df: int, prob: float) -> float:
    """Quantile of ``chi2_df`` by bracketed root-finding on the incomplete gamma."""
    if int(df) != df or df < 1:
        raise InvalidInputError(f"df must be a positive integer, got {df!r}")
    if not 0.0 <= prob < 1.0:
        if prob == 1.0:
            return math.inf
        raise InvalidInputError(f"prob must lie in [0, 1], got {prob!r}")
    if prob == 0.0:
        return 0.0
    hi = float(df) + 10.0
    while chi_square_cdf(hi, df) < prob:
        hi *= 2.0
    return brentq(lambda q: chi_square_cdf(q, df) - prob, 0.0, hi, xtol=1e-14, rtol=1e-15, maxiter=500)


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (np.floating, float)):
        return float(v) if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class MeleResult:
    """Maximum empirical likelihood estimate and the statistic at it."""

    theta: np.ndarray
    statistic: float
    t: np.ndarray
    converged: bool
    evaluations: int
    variant: str
    system: str
    param_names: tuple = ()

    def to_dict(self):
        return _jsonable({
            "system": self.system,
            "variant": self.variant,
            "theta": dict(zip(self.param_names, self.theta)) if self.param_names else list(self.theta),
            "statistic": self.statistic,
            "multiplier": self.t,
            "converged": self.converged,
            "evaluations": self.evaluations,
        })


@dataclass
class TestReport:
    """Outcome of one chi-square calibrated test."""

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    df: int
    p_value: float
    alpha: float
    variant: str
    warnings: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def reject(self) -> bool:
        return self.p_value < self.alpha

    @property
    def critical_value(self) -> float:
        return chi_square_quantile(self.df, 1.0 - self.alpha)

    def to_dict(self):
        out = {
            "test": self.name,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "critical_value": self.critical_value,
            "reject": self.reject,
            "variant": self.variant,
            "warnings": list(self.warnings),
        }
        out.update(self.extra)
        return _jsonable(out)


def _report(name, stat, df, alpha, variant, warns, **extra):
    stat = float(stat)
    if stat < 0:
        stat = 0.0
    p = chi_square_sf(stat, df)
    return TestReport(name=name, statistic=stat, df=int(df), p_value=p, alpha=alpha,
                      variant=variant, warnings=list(warns), extra=extra)


@dataclass
class ConfidenceRegion:
    """Likelihood-ratio confidence set ``{theta : ell(theta) - ell(theta_hat) <= cutoff}``.

    For one parameter ``interval`` is the outermost pair of endpoints and
    ``intervals`` lists every bracketing piece found; for two parameters
    ``grid`` and ``statistics`` tabulate the statistic over the scan.
    """

    level: float
    cutoff: float
    theta_hat: np.ndarray
    offset: float
    interval: tuple = None
    intervals: list = field(default_factory=list)
    lower_at_bound: bool = False
    upper_at_bound: bool = False
    grid: np.ndarray = None
    statistics: np.ndarray = None
    warnings: list = field(default_factory=list)

    def contains(self, theta, objective) -> bool:
        return objective(theta) - self.offset <= self.cutoff

    def to_dict(self):
        out = {
            "level": self.level,
            "cutoff": self.cutoff,
            "theta_hat": self.theta_hat,
            "statistic_at_mele": self.offset,
            "warnings": list(self.warnings),
        }
        if self.interval is not None:
            out["endpoints"] = list(self.interval)
            out["intervals"] = [list(iv) for iv in self.intervals]
            out["lower_at_bound"] = self.lower_at_bound
            out["upper_at_bound"] = self.upper_at_bound
        if self.grid is not None:
            out["grid"] = self.grid
            out["statistics"] = self.statistics
            out["inside"] = (self.statistics - self.offset) <= self.cutoff
        return _jsonable(out)


# ---------------------------------------------------------------------------
# outer optimisation
# ---------------------------------------------------------------------------


class profile_objective:
    """``theta -> ell(theta)`` with caching; infeasible or invalid values give ``inf``."""

    def __init__(self, system, pgram, variant="plain", config: ELConfig = DEFAULT_CONFIG):
        self.system = system
        self.pgram = pgram
        self.variant = normalize_variant(variant)
        self.config = config
        self.evaluations = 0
        self.failures = 0
        self._cache = {}
        self._warm = None

    def ratio(self, theta):
        out = log_el_ratio(self.system, theta, self.pgram, self.variant, self.config, t0=self._warm)
        if out.feasible:
            self._warm = out.solution.t
        return out

    def __call__(self, theta) -> float:
        theta = np.asarray(theta, dtype=float).reshape(self.system.p)
        key = theta.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self.evaluations += 1
        try:
            value = self.ratio(theta).statistic
        except InvalidInputError:
            value = math.inf
        except NumericalFailure:
            self.failures += 1
            value = math.inf
        if len(self._cache) > 50000:
            self._cache.clear()
        self._cache[key] = value
        return value


_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(fun, a, b, xtol):
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = fun(c), fun(d)
    while abs(b - a) > xtol * (1.0 + abs(c)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def _minimize_1d(fun, lo, hi, x0, grid=41, xtol=1e-11):
    xs = np.linspace(lo, hi, grid)
    if x0 is not None and lo <= x0 <= hi:
        xs = np.unique(np.r_[xs, x0])
    vals = np.array([fun(x) for x in xs])
    if not np.any(np.isfinite(vals)):
        return None, math.inf
    i = int(np.argmin(vals))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, xs.size - 1)]
    x, fx = _golden(fun, a, b, xtol)
    # parabolic polish through the final bracket
    h = max(1e-7 * (1.0 + abs(x)), 1e-9)
    fl, fr = fun(x - h), fun(x + h)
    denom = fl - 2.0 * fx + fr
    if np.isfinite(denom) and denom > 0:
        xp = x + 0.5 * h * (fl - fr) / denom
        if lo <= xp <= hi:
            fp = fun(xp)
            if fp < fx:
                x, fx = xp, fp
    if vals[i] < fx:
        x, fx = xs[i], vals[i]
    return np.array([x]), fx


def _clip(x, bounds):
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    return np.minimum(np.maximum(x, lo), hi)


def _initial_simplex(x0, bounds):
    p = x0.size
    simplex = [x0]
    for i in range(p):
        lo, hi = bounds[i]
        width = hi - lo if np.isfinite(hi - lo) else 1.0
        step = max(0.05 * abs(x0[i]), 0.02 * width, 1e-4)
        y = x0.copy()
        y[i] = x0[i] + step if x0[i] + step <= hi else x0[i] - step
        simplex.append(y)
    return np.array(simplex)


def _random_feasible(fun, bounds, rng, tries=200):
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    for _ in range(tries):
        x = lo + (hi - lo) * rng.random(lo.size)
        if np.isfinite(fun(x)):
            return x
    return None


def _minimize_nd(fun, bounds, x0, restarts, rng, xtol=1e-7):
    starts = []
    if x0 is not None and np.isfinite(fun(x0)):
        starts.append(np.asarray(x0, dtype=float))
    else:
        x = _random_feasible(fun, bounds, rng)
        if x is None:
            return None, math.inf, False
        starts.append(x)
    best_x, best_f, ok = None, math.inf, False

    def run(start):
        tol = xtol * (1.0 + float(np.linalg.norm(start)))
        res = minimize(fun, start, method="Nelder-Mead", bounds=bounds,
                       options={"initial_simplex": _initial_simplex(start, bounds),
                                "xatol": tol, "fatol": 1e-12, "maxiter": 4000 * start.size,
                                "maxfev": 8000 * start.size})
        return _clip(np.asarray(res.x, dtype=float), bounds), float(res.fun), bool(res.success)

    x, f, success = run(starts[0])
    # restart from the optimum to undo premature simplex collapse
    x2, f2, success2 = run(x)
    if f2 <= f:
        x, f, success = x2, f2, success2
    best_x, best_f, ok = x, f, success
    for _ in range(restarts):
        s = _random_feasible(fun, bounds, rng, tries=50)
        if s is None:
            continue
        x, f, success = run(s)
        if f < best_f - 1e-10:
            best_x, best_f, ok = x, f, success
    return best_x, best_f, ok


def _resolve_bounds(system, pgram, bounds):
    b = system.bounds(pgram) if bounds is None else list(bounds)
    if len(b) != system.p:
        raise InvalidInputError(f"expected {system.p} bounds, got {len(b)}")
    return [(float(lo), float(hi)) for lo, hi in b]


def _optimize(fun, p, bounds, x0, restarts, rng):
    if p == 1:
        x, f = _minimize_1d(fun, bounds[0][0], bounds[0][1], None if x0 is None else float(x0[0]))
        return x, f, x is not None
    return _minimize_nd(fun, bounds, x0, restarts, rng)


def mele(system: EstimatingSystem, pgram, variant="plain", theta_init=None, bounds=None,
         restarts: int = 3, random_state=0, config: ELConfig = DEFAULT_CONFIG) -> MeleResult:
    """Maximum empirical likelihood estimate by derivative-free outer search.

    One parameter: grid scan, golden-section refinement and a parabolic
    polish. Several parameters: bounded Nelder-Mead from ``theta_init``,
    restarted at its optimum and from ``restarts`` random feasible points.
    ``p = 0`` systems just evaluate the statistic.
    """
    variant = normalize_variant(variant)
    obj = profile_objective(system, pgram, variant, config)
    if system.p == 0:
        ratio = obj.ratio(np.empty(0))
        return MeleResult(np.empty(0), ratio.statistic, ratio.solution.t, ratio.feasible, 1,
                          variant, system.name, ())
    b = _resolve_bounds(system, pgram, bounds)
    x0 = system.initial(pgram) if theta_init is None else np.asarray(theta_init, dtype=float).reshape(system.p)
    x0 = _clip(x0, b)
    rng = np.random.default_rng(random_state)
    x, f, ok = _optimize(obj, system.p, b, x0, restarts, rng)
    if x is None or not np.isfinite(f):
        raise EstimationFailure(f"no feasible parameter value for {system.name!r} within bounds {b}")
    fx0 = obj(x0)
    # ties go to the value nearer the starting point
    if fx0 <= f:
        x, f = x0, fx0
    ratio = obj.ratio(x)
    return MeleResult(theta=x, statistic=ratio.statistic, t=ratio.solution.t, converged=bool(ok),
                      evaluations=obj.evaluations, variant=variant, system=system.name,
                      param_names=system.param_names)


# ---------------------------------------------------------------------------
# tests
# ---------------------------------------------------------------------------


def _system_warnings(system):
    return [KAPPA4_WARNING] if system.nonzero_target else []


def test_parameter(system, pgram, theta0, variant="plain", alpha=0.05, mele_result=None,
                   bounds=None, restarts=3, config: ELConfig = DEFAULT_CONFIG):
    """Test ``H0: theta = theta0``.

    Returns ``(simple, ratio)``: ``ell(theta0)`` against ``chi2_r`` and, when
    ``p >= 1``, ``ell(theta0) - ell(theta_hat)`` against ``chi2_p`` (else ``None``).
    """
    variant = normalize_variant(variant)
    obj = profile_objective(system, pgram, variant, config)
    theta0 = np.asarray(theta0, dtype=float).reshape(system.p)
    warns = _system_warnings(system)
    stat0 = obj(theta0)
    if not np.isfinite(stat0):
        warns = warns + [INFEASIBLE_WARNING]
    simple = _report("parameter", stat0, system.r, alpha, variant, warns,
                     theta0=theta0, feasible=bool(np.isfinite(stat0)))
    if system.p == 0:
        return simple, None
    if mele_result is None:
        mele_result = mele(system, pgram, variant, bounds=bounds, restarts=restarts, config=config)
    best = mele_result.statistic
    theta_hat = mele_result.theta
    if stat0 < best:
        best, theta_hat = stat0, theta0
    lr = _report("parameter-lr", stat0 - best if np.isfinite(stat0) else math.inf, system.p,
                 alpha, variant, warns, theta0=theta0, theta_hat=theta_hat,
                 statistic_at_mele=best, feasible=bool(np.isfinite(stat0)))
    return simple, lr


def test_moment_validity(system, pgram, variant="plain", alpha=0.05, mele_result=None,
                         bounds=None, restarts=3, config: ELConfig = DEFAULT_CONFIG) -> TestReport:
    """Overidentification test: ``ell(theta_hat)`` against ``chi2_{r-p}``."""
    if system.r <= system.p:
        raise InvalidRequestError("moment validity test needs r > p (df = r - p would be 0)")
    variant = normalize_variant(variant)
    if mele_result is None:
        mele_result = mele(system, pgram, variant, bounds=bounds, restarts=restarts, config=config)
    return _report("moment-validity", mele_result.statistic, system.r - system.p, alpha, variant,
                   _system_warnings(system), theta_hat=mele_result.theta)


def _numeric_jacobian(psi, theta):
    theta = np.asarray(theta, dtype=float)
    base = np.atleast_1d(psi(theta))
    J = np.empty((base.size, theta.size))
    for i in range(theta.size):
        h = 1e-6 * max(1.0, abs(theta[i]))
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        J[:, i] = (np.atleast_1d(psi(up)) - np.atleast_1d(psi(dn))) / (2 * h)
    return J


def test_constrained(system, pgram, psi, variant="plain", jac=None, theta0=None, alpha=0.05,
                     bounds=None, restarts=3, penalty0=100.0, stages=6,
                     config: ELConfig = DEFAULT_CONFIG):
    """Test ``H0: psi(theta) = 0`` with ``psi: R^p -> R^q``, ``q < p``.

    The constrained estimate follows a quadratic-penalty path (weight times
    ten per stage) and is then projected onto ``psi = 0`` by Gauss-Newton.
    Returns ``(constraint_test, remaining)`` where the second compares
    ``ell(theta0) - ell(theta_hat_psi)`` with ``chi2_{p-q}`` if ``theta0`` is given.
    """
    variant = normalize_variant(variant)
    b = _resolve_bounds(system, pgram, bounds)
    obj = profile_objective(system, pgram, variant, config)
    full = mele(system, pgram, variant, bounds=b, restarts=restarts, config=config)
    q = np.atleast_1d(psi(full.theta)).size
    if q >= system.p:
        raise InvalidRequestError(f"need q < p for a constrained test, got q={q}, p={system.p}")
    jacobian = jac if jac is not None else (lambda th: _numeric_jacobian(psi, th))
    warns = _system_warnings(system)
    rng = np.random.default_rng(0)

    x = full.theta.copy()
    if np.linalg.norm(np.atleast_1d(psi(x))) > 1e-12:
        weight = float(penalty0)
        for _ in range(stages):
            def penalised(th, w=weight):
                v = obj(th)
                return v + w * float(np.sum(np.atleast_1d(psi(th)) ** 2)) if np.isfinite(v) else v
            x_new, f_new, _ = _minimize_nd(penalised, b, x, 0, rng)
            if x_new is not None and np.isfinite(f_new):
                x = x_new
            weight *= 10.0
        for _ in range(20):
            r = np.atleast_1d(psi(x))
            if np.linalg.norm(r) <= 1e-12:
                break
            J = np.atleast_2d(jacobian(x))
            x = _clip(x - J.T @ np.linalg.solve(J @ J.T, r), b)
    J = np.atleast_2d(jacobian(x))
    if np.linalg.matrix_rank(J) < q:
        raise InvalidRequestError("constraint Jacobian is rank deficient at the constrained optimum")
    stat_psi = obj(x)
    if not np.isfinite(stat_psi):
        raise EstimationFailure("constrained search found no feasible point", best=x)
    first = _report("constraint", stat_psi - full.statistic, q, alpha, variant, warns,
                    theta_constrained=x, theta_hat=full.theta)
    second = None
    if theta0 is not None:
        theta0 = np.asarray(theta0, dtype=float).reshape(system.p)
        s0 = obj(theta0)
        w2 = warns + ([INFEASIBLE_WARNING] if not np.isfinite(s0) else [])
        second = _report("constrained-parameter", s0 - stat_psi, system.p - q, alpha, variant, w2,
                         theta0=theta0, theta_constrained=x)
    return first, second


def test_profile(system, pgram, fixed, variant="plain", alpha=0.05, bounds=None, restarts=3,
                 mele_result=None, random_state=0, config: ELConfig = DEFAULT_CONFIG) -> TestReport:
    """Test ``H0: theta_1 = theta_1^0`` for a subset of coordinates.

    ``fixed`` maps coordinate index to hypothesised value. The remaining
    coordinates are profiled out; the statistic
    ``ell(theta_1^0, theta_hat_2) - ell(theta_hat)`` is compared with ``chi2_q``.
    """
    variant = normalize_variant(variant)
    fixed = {int(k): float(v) for k, v in dict(fixed).items()}
    q = len(fixed)
    if not 1 <= q < system.p:
        raise InvalidRequestError(f"need 1 <= q < p, got q={q}, p={system.p}")
    if any(k < 0 or k >= system.p for k in fixed):
        raise InvalidInputError("fixed index out of range")
    b = _resolve_bounds(system, pgram, bounds)
    obj = profile_objective(system, pgram, variant, config)
    if mele_result is None:
        mele_result = mele(system, pgram, variant, bounds=b, restarts=restarts,
                           random_state=random_state, config=config)
    free = [i for i in range(system.p) if i not in fixed]

    def embed(z):
        th = np.empty(system.p)
        for k, v in fixed.items():
            th[k] = v
        th[free] = z
        return th

    sub = lambda z: obj(embed(np.asarray(z, dtype=float)))
    x0 = mele_result.theta[free]
    xb = [b[i] for i in free]
    z, fz, _ = _optimize(sub, len(free), xb, x0, restarts, np.random.default_rng(random_state))
    warns = _system_warnings(system)
    if z is None or not np.isfinite(fz):
        return _report("profile", math.inf, q, alpha, variant, warns + [INFEASIBLE_WARNING],
                       fixed=fixed, feasible=False)
    best = min(mele_result.statistic, fz)
    return _report("profile", fz - best, q, alpha, variant, warns, fixed=fixed,
                   theta_profiled=embed(z), theta_hat=mele_result.theta, feasible=True)



def _bisect(fun, inside, outside, tol=1e-12):
    """Boundary between ``inside`` (fun <= 0) and ``outside`` (fun > 0)."""
    a, b = inside, outside
    while abs(b - a) > tol * (1.0 + abs(a)):
        m = 0.5 * (a + b)
        if fun(m) <= 0:
            a = m
        else:
            b = m
    return a


def confidence_region(system, pgram, variant="plain", level=0.95, bounds=None, resolution=None,
                      restarts=3, mele_result=None, config: ELConfig = DEFAULT_CONFIG) -> ConfidenceRegion:
    """Region ``{theta : ell(theta) - ell(theta_hat) <= chi2_{p, level}}``.

    One parameter: scan ``resolution`` points, then bisect every crossing;
    all bracketing pieces are reported. Two parameters: a
    ``resolution x resolution`` grid of statistics.
    """
    if system.p not in (1, 2):
        raise InvalidRequestError("region output supports p = 1 or 2; use test_parameter for membership")
    variant = normalize_variant(variant)
    b = _resolve_bounds(system, pgram, bounds)
    obj = profile_objective(system, pgram, variant, config)
    if mele_result is None:
        mele_result = mele(system, pgram, variant, bounds=b, restarts=restarts, config=config)
    theta_hat = mele_result.theta
    offset = mele_result.statistic
    cutoff = chi_square_quantile(system.p, level)
    warns = _system_warnings(system)

    if system.p == 2:
        res = resolution or 41
        g1 = np.linspace(b[0][0], b[0][1], res)
        g2 = np.linspace(b[1][0], b[1][1], res)
        grid = np.array([[u, v] for u in g1 for v in g2])
        stats = np.array([obj(th) for th in grid])
        inside = stats - offset <= cutoff
        lo_hit = bool(np.any(inside & ((grid[:, 0] == g1[0]) | (grid[:, 1] == g2[0]))))
        hi_hit = bool(np.any(inside & ((grid[:, 0] == g1[-1]) | (grid[:, 1] == g2[-1]))))
        if lo_hit or hi_hit:
            warns.append("region touches the scan bounds")
        return ConfidenceRegion(level=level, cutoff=cutoff, theta_hat=theta_hat, offset=offset,
                                lower_at_bound=lo_hit, upper_at_bound=hi_hit, grid=grid,
                                statistics=stats, warnings=warns)

    lo, hi = b[0]
    res = resolution or 201
    def fun(x):
        v = obj(np.array([x]))
        return math.inf if not np.isfinite(v) else v - offset - cutoff
    xs = np.unique(np.r_[np.linspace(lo, hi, res), theta_hat[0]])
    vals = np.array([fun(x) for x in xs])
    inside = vals <= 0
    pieces = []
    i = 0
    while i < xs.size:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < xs.size and inside[j + 1]:
            j += 1
        left = xs[0] if i == 0 else _bisect(fun, xs[i], xs[i - 1])
        right = xs[-1] if j == xs.size - 1 else _bisect(fun, xs[j], xs[j + 1])
        pieces.append((float(left), float(right)))
        i = j + 1
    lower_at_bound = bool(inside[0])
    upper_at_bound = bool(inside[-1])
    if lower_at_bound or upper_at_bound:
        warns.append("region touches the scan bounds")
    if len(pieces) > 1:
        warns.append(f"region is a union of {len(pieces)} disjoint intervals")
    interval = (pieces[0][0], pieces[-1][1]) if pieces else None
    return ConfidenceRegion(level=level, cutoff=cutoff, theta_hat=theta_hat, offset=offset,
                            interval=interval, intervals=pieces, lower_at_bound=lower_at_bound,
                            upper_at_bound=upper_at_bound, warnings=warns)


# ---------------------------------------------------------------------------
# goodness of fit
# ---------------------------------------------------------------------------


def test_gof_simple(f0, pgram, alpha=0.05, config: ELConfig = DEFAULT_CONFIG) -> TestReport:
    """Test ``H0: f = f0`` with the mean-corrected statistic against ``chi2_1``.

    The report also carries ``A_n = 2pi/n sum I^2/f0^2``, ``B_n = 2pi/n sum I/f0``
    and the ratio statistic ``T_n = pi A_n / B_n^2``.
    """
    system = gof_simple_system(f0)
    lam, I = pgram.frequencies, pgram.ordinates
    f = system.density(np.empty(0), lam)
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise InvalidInputError("f0 must be positive and finite at every Fourier frequency")
    ratio = log_el_ratio(system, np.empty(0), pgram, "mean_corrected", config)
    A = 2.0 * np.pi / pgram.n * np.sum(I**2 / f**2)
    B = 2.0 * np.pi / pgram.n * np.sum(I / f)
    T = np.pi * A / B**2 if B > 0 else math.inf
    warns = [KAPPA4_WARNING]
    if not ratio.feasible:
        warns.append(INFEASIBLE_WARNING)
    return _report("gof-simple", ratio.statistic, 1, alpha, "mean_corrected", warns,
                   A_n=A, B_n=B, T_n=T, feasible=ratio.feasible)


def test_gof_composite(family, pgram, alpha=0.05, bounds=None, restarts=3,
                       config: ELConfig = DEFAULT_CONFIG) -> TestReport:
    """Test ``H0: f in family`` (Gaussian data) with the squared-moment statistic.

    ``df = r - p = 1``. ``statistic / n`` is reported as a consistency
    diagnostic; it stays bounded away from zero under misspecification.
    """
    system = gof_composite_system(family)
    res = mele(system, pgram, "squared_moment", bounds=bounds, restarts=restarts, config=config)
    return _report("gof-composite", res.statistic, system.r - system.p, alpha, "squared_moment",
                   [GAUSSIAN_WARNING, KAPPA4_WARNING], theta_hat=res.theta,
                   param_names=list(system.param_names), statistic_per_n=res.statistic / pgram.n)
