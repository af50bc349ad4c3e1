"""Catalog of spectral estimating systems ``(G_theta, M)``.

A system pairs a vector of even functions ``G_theta(lam)`` with the value
``M`` that ``int_0^pi G_theta0 f dlam`` takes at the true parameter. Every
callable is evaluated on ``[0, pi]`` only, which makes evenness automatic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import InvalidInputError
from .models import SpectralFamily, SpectralModel, get_family, parse_model

__all__ = [
    "EstimatingSystem",
    "autocorrelation_system",
    "acf_power_system",
    "spectral_cdf_system",
    "whittle_full_system",
    "whittle_nuisance_free_system",
    "gof_simple_system",
    "white_noise_acf_system",
    "gof_composite_system",
    "parse_system",
]


@dataclass(frozen=True)
class EstimatingSystem:
    """An ``r``-vector of estimating functions in a ``p``-dimensional parameter.

    Attributes
    ----------
    func : callable
        ``func(theta, lam) -> (len(lam), r)`` array of ``G_theta(lam_j)``.
    target : ndarray
        The spectral mean ``M``.
    jac : callable, optional
        ``jac(theta, lam) -> (len(lam), r, p)``; central differences otherwise.
    model_density : callable, optional
        ``model_density(theta, lam) -> f_theta(lam)`` for the mean-corrected
        and squared-moment constraints.
    squared_moment : bool
        First coordinate is the ``I_n^2`` moment; only usable with the
        ``"squared_moment"`` constraint variant.
    assume_gaussian : bool
        Permit a nonzero ``M`` with the plain ``ell_n`` statistic.
    args : tuple
        Constructor arguments (lags, cut points) at full precision.
    """

    name: str
    r: int
    p: int
    func: Callable
    target: np.ndarray
    jac: Optional[Callable] = None
    model_density: Optional[Callable] = None
    squared_moment: bool = False
    assume_gaussian: bool = False
    param_names: tuple = ()
    bounds_fn: Optional[Callable] = field(default=None, repr=False)
    init_fn: Optional[Callable] = field(default=None, repr=False)
    family: Optional[SpectralFamily] = field(default=None, repr=False)
    args: tuple = ()

    def __post_init__(self):
        if not (self.r >= self.p >= 0 and self.r >= 1):
            raise InvalidInputError(f"need r >= p >= 0 and r >= 1, got r={self.r}, p={self.p}")
        target = np.asarray(self.target, dtype=float).reshape(self.r)
        target.setflags(write=False)
        object.__setattr__(self, "target", target)
        if not self.param_names:
            object.__setattr__(self, "param_names", tuple(f"theta{i + 1}" for i in range(self.p)))

    @property
    def nonzero_target(self) -> bool:
        """True when ``M != 0``: valid only if the innovation fourth cumulant is 0."""
        return bool(np.any(self.target != 0))

    def evaluate(self, theta, lam) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(self.p)
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        out = np.asarray(self.func(theta, lam), dtype=float)
        return out.reshape(lam.size, self.r)

    def gradient(self, theta, lam) -> np.ndarray:
        """``dG_theta(lam)/dtheta`` with shape ``(len(lam), r, p)``."""
        theta = np.asarray(theta, dtype=float).reshape(self.p)
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if self.jac is not None:
            return np.asarray(self.jac(theta, lam), dtype=float).reshape(lam.size, self.r, self.p)
        out = np.empty((lam.size, self.r, self.p))
        for i in range(self.p):
            h = 1e-6 * max(1.0, abs(theta[i]))
            up, dn = theta.copy(), theta.copy()
            up[i] += h
            dn[i] -= h
            out[:, :, i] = (self.evaluate(up, lam) - self.evaluate(dn, lam)) / (2 * h)
        return out

    def density(self, theta, lam) -> np.ndarray:
        if self.model_density is None:
            raise InvalidInputError(f"system {self.name!r} has no model density")
        theta = np.asarray(theta, dtype=float).reshape(self.p)
        return np.asarray(self.model_density(theta, np.atleast_1d(lam)), dtype=float)

    def bounds(self, pgram=None):
        if self.bounds_fn is None:
            return [(-np.inf, np.inf)] * self.p
        return list(self.bounds_fn(pgram))

    def initial(self, pgram):
        if self.init_fn is None:
            lo_hi = self.bounds(pgram)
            return np.array([0.5 * (lo + hi) for lo, hi in lo_hi])
        return np.asarray(self.init_fn(pgram), dtype=float).reshape(self.p)


def _ratio(pgram, g):
    I = pgram.ordinates
    return float(np.sum(g * I) / np.sum(I))


def autocorrelation_system(lags) -> EstimatingSystem:
    """``G = (cos(m_1 lam), ..., cos(m_p lam)) - theta`` with ``M = 0``."""
    lags = tuple(int(m) for m in np.atleast_1d(lags))
    if not lags or any(m <= 0 for m in lags):
        raise InvalidInputError("lags must be positive integers")
    if len(set(lags)) != len(lags):
        raise InvalidInputError(f"duplicate lags in {lags}")
    m = np.asarray(lags, dtype=float)
    p = len(lags)

    def func(theta, lam):
        return np.cos(np.outer(lam, m)) - theta

    def jac(theta, lam):
        return np.broadcast_to(-np.eye(p), (lam.size, p, p))

    def init(pgram):
        return np.array([_ratio(pgram, np.cos(k * pgram.frequencies)) for k in m])

    return EstimatingSystem(
        name="acf:" + ",".join(map(str, lags)), r=p, p=p, func=func, target=np.zeros(p),
        jac=jac, param_names=tuple(f"rho{k}" for k in lags),
        bounds_fn=lambda _: [(-1.0, 1.0)] * p, init_fn=init, args=lags,
    )


def acf_power_system(max_lag: int = 2) -> EstimatingSystem:
    """Overidentified AR(1) autocorrelation system ``cos(k lam) - theta^k``, k = 1..m.

    Encodes ``rho(k) = rho(1)^k``, which holds for AR(1) processes.
    """
    mlag = int(max_lag)
    if mlag < 1:
        raise InvalidInputError("max_lag must be >= 1")
    k = np.arange(1, mlag + 1, dtype=float)

    def func(theta, lam):
        return np.cos(np.outer(lam, k)) - theta[0] ** k

    def jac(theta, lam):
        d = -k * theta[0] ** (k - 1)
        return np.broadcast_to(d[:, None], (lam.size, mlag, 1))

    def init(pgram):
        return np.array([_ratio(pgram, np.cos(pgram.frequencies))])

    return EstimatingSystem(
        name=f"acf-ar1:{mlag}", r=mlag, p=1, func=func, target=np.zeros(mlag), jac=jac,
        param_names=("rho1",), bounds_fn=lambda _: [(-0.999, 0.999)], init_fn=init,
        args=(mlag,),
    )


def spectral_cdf_system(taus) -> EstimatingSystem:
    """``G = (1{lam <= tau_1}, ..., 1{lam <= tau_p}) - theta`` with ``M = 0``.

    Ties ``lam == tau`` count as inside.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if taus.size == 0 or np.any(taus <= 0) or np.any(taus >= np.pi):
        raise InvalidInputError("every tau must lie in (0, pi)")
    if np.any(np.diff(taus) <= 0):
        raise InvalidInputError("taus must be strictly increasing")
    p = taus.size

    def func(theta, lam):
        return (lam[:, None] <= taus[None, :]).astype(float) - theta

    def jac(theta, lam):
        return np.broadcast_to(-np.eye(p), (lam.size, p, p))

    def init(pgram):
        return np.array([_ratio(pgram, (pgram.frequencies <= t).astype(float)) for t in taus])

    return EstimatingSystem(
        name="cdf:" + ",".join(f"{t:g}" for t in taus), r=p, p=p, func=func,
        target=np.zeros(p), jac=jac, param_names=tuple(f"F({t:g})" for t in taus),
        bounds_fn=lambda _: [(0.0, 1.0)] * p, init_fn=init, args=tuple(taus.tolist()),
    )


def _whittle_columns(family, theta, lam):
    inv = 1.0 / family.density(theta, lam)
    return np.column_stack([inv, family.inv_density_grad(theta, lam)])


def _whittle_jac(family, theta, lam):
    # numerical: f^{-1} is smooth in theta for the supported families
    p = theta.size
    out = np.empty((lam.size, p, p))
    for i in range(p):
        h = 1e-6 * max(1.0, abs(theta[i]))
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        out[:, :, i] = (_whittle_columns(family, up, lam) - _whittle_columns(family, dn, lam)) / (2 * h)
    return out


def _as_family(family):
    return get_family(family) if isinstance(family, str) else family


def whittle_full_system(family, assume_gaussian: bool = False) -> EstimatingSystem:
    """``G = (f^{-1}, df^{-1}/dvartheta)`` with ``M = (pi, 0, ..., 0)``.

    The nonzero target makes the resulting statistics valid only for
    innovations with zero fourth cumulant (e.g. Gaussian data).
    """
    fam = _as_family(family)
    p = fam.n_params
    target = np.zeros(p)
    target[0] = np.pi
    return EstimatingSystem(
        name=f"whittle:{fam.name}", r=p, p=p,
        func=lambda th, lam: _whittle_columns(fam, th, lam),
        target=target,
        jac=lambda th, lam: _whittle_jac(fam, th, lam),
        model_density=fam.density,
        assume_gaussian=assume_gaussian,
        param_names=fam.param_names,
        bounds_fn=fam.default_bounds,
        init_fn=fam.whittle_estimate,
        family=fam,
    )


def whittle_nuisance_free_system(family) -> EstimatingSystem:
    """``G = dk^{-1}/dvartheta`` with ``M = 0``; ``sigma^2`` is concentrated out."""
    fam = _as_family(family)
    q = fam.n_params - 1
    if q < 1:
        raise InvalidInputError(f"family {fam.name!r} has no shape parameters")

    def func(shape, lam):
        return fam.inv_density_grad(np.r_[1.0, shape], lam)

    def jac(shape, lam):
        out = np.empty((lam.size, q, q))
        for i in range(q):
            h = 1e-6 * max(1.0, abs(shape[i]))
            up, dn = shape.copy(), shape.copy()
            up[i] += h
            dn[i] -= h
            out[:, :, i] = (func(up, lam) - func(dn, lam)) / (2 * h)
        return out

    return EstimatingSystem(
        name=f"whittle-nf:{fam.name}", r=q, p=q, func=func, target=np.zeros(q), jac=jac,
        param_names=fam.shape_names,
        bounds_fn=lambda _: list(fam.shape_bounds),
        init_fn=lambda pg: fam.whittle_estimate(pg)[1:],
        family=fam,
    )


def _as_density(f0):
    if isinstance(f0, str):
        f0 = parse_model(f0)
    if isinstance(f0, SpectralModel):
        return f0.density
    if callable(f0):
        return f0
    raise InvalidInputError("f0 must be a SpectralModel, a model string or a callable")


def gof_simple_system(f0) -> EstimatingSystem:
    """Single function ``1/f0`` with ``M = pi`` for testing ``f = f0`` (``p = 0``)."""
    dens = _as_density(f0)

    def model_density(theta, lam):
        return np.asarray(dens(lam), dtype=float)

    def func(theta, lam):
        return (1.0 / model_density(theta, lam))[:, None]

    label = f0.describe() if isinstance(f0, SpectralModel) else getattr(f0, "__name__", "f0")
    return EstimatingSystem(
        name=f"gof:{label}", r=1, p=0, func=func, target=np.array([np.pi]),
        model_density=model_density,
    )


def white_noise_acf_system(m: int) -> EstimatingSystem:
    """``G = (cos lam, ..., cos m lam)`` with ``M = 0``: a white-noise test (``p = 0``)."""
    m = int(m)
    if m < 1:
        raise InvalidInputError("m must be >= 1")
    k = np.arange(1, m + 1, dtype=float)
    return EstimatingSystem(
        name=f"wn-acf:{m}", r=m, p=0, func=lambda th, lam: np.cos(np.outer(lam, k)),
        target=np.zeros(m),
    )


def gof_composite_system(family) -> EstimatingSystem:
    """Whittle system plus the overidentifying ``(f/f_theta)^2`` moment; ``r = p + 1``.

    Coordinate 0 is ``f_theta^{-2}`` with target ``pi`` and is paired with
    ``I_n^2 / 2`` by the squared-moment constraint builder.
    """
    fam = _as_family(family)
    p = fam.n_params

    def func(theta, lam):
        w = _whittle_columns(fam, theta, lam)
        return np.column_stack([w[:, 0] ** 2, w])

    target = np.zeros(p + 1)
    target[0] = np.pi
    target[1] = np.pi
    return EstimatingSystem(
        name=f"gof-composite:{fam.name}", r=p + 1, p=p, func=func, target=target,
        model_density=fam.density, squared_moment=True,
        param_names=fam.param_names, bounds_fn=fam.default_bounds,
        init_fn=fam.whittle_estimate, family=fam,
    )


def parse_system(text: str) -> EstimatingSystem:
    """Build a catalog system from its CLI name.

    ``acf:1,2,5``, ``acf-ar1:2``, ``cdf:0.5,1.0``, ``whittle:ar1``,
    ``whittle-nf:ar1``, ``gof:white(1)``, ``wn-acf:3``, ``gof-composite:ar1``.
    """
    kind, sep, arg = text.strip().partition(":")
    kind = kind.lower()
    if not sep or not arg.strip():
        raise InvalidInputError(f"system {text!r} must look like kind:arguments")
    try:
        if kind == "acf":
            return autocorrelation_system([int(v) for v in arg.split(",")])
        if kind == "acf-ar1":
            return acf_power_system(int(arg))
        if kind == "cdf":
            return spectral_cdf_system([float(v) for v in arg.split(",")])
        if kind == "wn-acf":
            return white_noise_acf_system(int(arg))
    except ValueError as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"bad arguments in system {text!r}") from None
    if kind == "whittle":
        return whittle_full_system(arg)
    if kind == "whittle-nf":
        return whittle_nuisance_free_system(arg)
    if kind == "gof":
        model = parse_model(arg if "(" in arg or ":" in arg else f"{arg}(1)")
        return gof_simple_system(model)
    if kind == "gof-composite":
        return gof_composite_system(arg)
    raise InvalidInputError(f"unknown system kind {kind!r}")
