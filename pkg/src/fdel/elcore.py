"""Inner empirical-likelihood problem: constraints, feasibility and the dual solve.

For constraint vectors ``z_1..z_N`` the log EL ratio is

    -log R = max_t  sum_j log(1 + t'z_j),

a concave maximisation over the open polytope ``{t : 1 + t'z_j > 0}``.
The implied weights are ``p_j = 1 / (N (1 + t'z_j))``; the frequency-domain
weights ``w_j`` summing to ``pi`` are ``pi * p_j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .exceptions import (
    ConfigurationError,
    InfeasibleError,
    InvalidInputError,
    NumericalFailure,
)

__all__ = [
    "ELConfig",
    "ELSolution",
    "ELRatio",
    "VARIANTS",
    "normalize_variant",
    "build_constraints",
    "feasible",
    "dual_objective",
    "solve_dual",
    "log_el_ratio",
    "statistic_scale",
]

VARIANTS = ("plain", "mean_corrected", "squared_moment")


@dataclass(frozen=True)
class ELConfig:
    """Tolerances for the dual Newton solve."""

    grad_tol: float = 1e-10
    max_iter: int = 100
    min_slack: float = 1e-10
    max_condition: float = 1e12
    max_halvings: int = 60


DEFAULT_CONFIG = ELConfig()


@dataclass(frozen=True)
class ELSolution:
    """Result of the dual solve.

    ``log_ratio`` is ``-log R`` (nonnegative, ``inf`` when infeasible) and
    ``weights`` are the ``p_j``, summing to one.
    """

    t: np.ndarray
    log_ratio: float
    weights: np.ndarray
    feasible: bool
    iterations: int
    grad_norm: float


@dataclass(frozen=True)
class ELRatio:
    """A scaled log EL ratio statistic, ``+inf`` when the constraints are infeasible."""

    statistic: float
    variant: str
    solution: ELSolution

    @property
    def feasible(self) -> bool:
        return self.solution.feasible


def normalize_variant(variant: str) -> str:
    v = str(variant).strip().lower().replace("-", "_")
    aliases = {"mean": "mean_corrected", "model": "mean_corrected", "squared": "squared_moment"}
    v = aliases.get(v, v)
    if v not in VARIANTS:
        raise InvalidInputError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return v


def statistic_scale(variant: str) -> float:
    """4 for the plain statistic, 2 for the mean-corrected ones."""
    return 4.0 if normalize_variant(variant) == "plain" else 2.0


def build_constraints(system, theta, pgram, variant: str = "plain") -> np.ndarray:
    """Constraint vectors ``z_j`` as an ``(N, r)`` array.

    plain          ``pi G(lam_j) I(lam_j) - M``
    mean_corrected ``pi G(lam_j) [I(lam_j) - f_theta(lam_j)]``
    squared_moment ``(pi [I^2 / (2 f_theta^2) - 1], pi G_w(lam_j) [I - f_theta])``
    """
    variant = normalize_variant(variant)
    if system.squared_moment != (variant == "squared_moment"):
        raise ConfigurationError(
            f"system {system.name!r} requires the "
            f"{'squared_moment' if system.squared_moment else 'plain or mean_corrected'} variant"
        )
    lam, I = pgram.frequencies, pgram.ordinates
    theta = np.asarray(theta, dtype=float).reshape(system.p)
    G = system.evaluate(theta, lam)
    if variant == "plain":
        if system.nonzero_target and not system.assume_gaussian:
            raise ConfigurationError(
                f"system {system.name!r} has M != 0; the plain statistic needs M = 0 "
                "(build the system with assume_gaussian=True to override)"
            )
        Z = np.pi * G * I[:, None] - system.target
    else:
        if system.model_density is None:
            raise ConfigurationError(f"variant {variant!r} needs a model density on {system.name!r}")
        f = system.density(theta, lam)
        if variant == "mean_corrected":
            Z = np.pi * G * (I - f)[:, None]
        else:
            first = np.pi * (I**2 / (2.0 * f**2) - 1.0)
            Z = np.column_stack([first, np.pi * G[:, 1:] * (I - f)[:, None]])
    if not np.all(np.isfinite(Z)):
        raise InvalidInputError(f"non-finite constraint values for {system.name!r} at theta={theta}")
    return Z


def feasible(Z) -> bool:
    """True iff 0 is interior to the convex hull of the rows of ``Z``.

    One dimension is decided by a sign change. Otherwise the rows must span
    ``R^r`` and admit strictly positive weights averaging to zero, which is
    checked with a linear program.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Z.shape[0] == 1 and Z.shape[1] != 1:
        Z = Z.reshape(-1, Z.shape[1])
    N, r = Z.shape
    if N <= r:
        return False
    if r == 1:
        return bool(Z.min() < 0 < Z.max())
    if not _coordinate_signs_ok(Z):
        return False
    scale = np.max(np.abs(Z))
    if np.linalg.matrix_rank(Z, tol=1e-12 * scale * N) < r:
        return False
    # max s  s.t.  Z'p = 0, sum p = 1, p_j >= s
    c = np.zeros(N + 1)
    c[-1] = -1.0
    A_eq = np.zeros((r + 1, N + 1))
    A_eq[:r, :N] = Z.T / scale
    A_eq[r, :N] = 1.0
    b_eq = np.zeros(r + 1)
    b_eq[r] = 1.0
    A_ub = np.hstack([-np.eye(N), np.ones((N, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(N), A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, None)] * N + [(None, None)], method="highs")
    return bool(res.status == 0 and -res.fun > 1e-12 / N)


def _coordinate_signs_ok(Z):
    return bool(np.all(Z.min(axis=0) < 0) and np.all(Z.max(axis=0) > 0))


def dual_objective(t, Z) -> float:
    """``sum_j log(1 + t'z_j)``; ``-inf`` outside the domain."""
    s = 1.0 + np.asarray(Z) @ np.asarray(t, dtype=float)
    if np.any(s <= 0):
        return -np.inf
    return float(np.sum(np.log(s)))


def _infeasible_solution(r, iterations=0):
    return ELSolution(t=np.full(r, np.nan), log_ratio=np.inf, weights=None,
                      feasible=False, iterations=iterations, grad_norm=np.nan)


def solve_dual(Z, config: ELConfig = DEFAULT_CONFIG, t0=None) -> ELSolution:
    """Newton ascent on the concave dual with step halving.

    ``t0`` is an optional warm start, used only if it lies in the domain
    and improves on ``t = 0``.

    Raises
    ------
    InfeasibleError
        0 is not interior to the hull of the rows of ``Z``.
    NumericalFailure
        The iteration budget ran out on a feasible problem; ``best`` holds
        the last iterate as an :class:`ELSolution`.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    N, r = Z.shape
    if N >= 1 and not np.any(Z):
        # constraints met exactly at equal weights
        return ELSolution(t=np.zeros(r), log_ratio=0.0, weights=np.full(N, 1.0 / N), feasible=True,
                          iterations=0, grad_norm=0.0)
    if N <= r or not _coordinate_signs_ok(Z):
        raise InfeasibleError("0 is not interior to the convex hull of the constraints")
    zmax = float(np.max(np.linalg.norm(Z, axis=1)))
    tol = config.grad_tol * N * min(1.0 + zmax, max(zmax, 1e-300))
    t = np.zeros(r)
    s = np.ones(N)
    h = 0.0
    if t0 is not None:
        t0 = np.asarray(t0, dtype=float).reshape(r)
        s0 = 1.0 + Z @ t0
        if np.all(np.isfinite(s0)) and np.all(s0 >= config.min_slack):
            h0 = float(np.sum(np.log(s0)))
            if h0 > 0:
                t, s, h = t0, s0, h0
    gnorm = np.inf
    it = 0
    runaway = False
    for it in range(1, config.max_iter + 1):
        inv = 1.0 / s
        g = Z.T @ inv
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol and abs(inv.sum() - N) <= 1e-11 * N:
            break
        A = Z * inv[:, None]
        H = A.T @ A
        evals, evecs = np.linalg.eigh(H)
        if evals[0] > 0 and evals[-1] <= config.max_condition * evals[0]:
            step = evecs @ ((evecs.T @ g) / evals)
        else:
            # damped gradient step when the Hessian is ill-conditioned
            step = g / max(evals[-1], 1e-300)
        alpha = 1.0
        for _ in range(config.max_halvings):
            t_new = t + alpha * step
            s_new = 1.0 + Z @ t_new
            if np.all(s_new >= config.min_slack):
                h_new = float(np.sum(np.log(s_new)))
                if h_new >= h - 1e-14 * (1.0 + abs(h)):
                    break
            alpha *= 0.5
        else:
            break
        t, s, h = t_new, s_new, h_new
        if it >= 3:
            # a direction u with u'z_j >= 0 for all j separates 0 from the hull
            u = t / np.linalg.norm(t)
            if np.all(Z @ u >= 0):
                raise InfeasibleError("0 is not interior to the convex hull of the constraints")
        if float(np.max(np.abs(Z @ t))) > 1e12:
            runaway = True
            break
    else:
        inv = 1.0 / s
        gnorm = float(np.linalg.norm(Z.T @ inv))

    w = 1.0 / (N * s)
    # t'g = N - sum(1/s): a vanishing gradient with weights not summing to one
    # means t escaped to infinity along a direction separating 0 from the hull
    if gnorm <= tol and not runaway and abs(w.sum() - 1.0) <= 1e-8:
        return ELSolution(t=t, log_ratio=max(h, 0.0), weights=w, feasible=True,
                          iterations=it, grad_norm=gnorm)
    if not feasible(Z):
        raise InfeasibleError("0 is not interior to the convex hull of the constraints")
    best = ELSolution(t=t, log_ratio=h, weights=w, feasible=True,
                      iterations=it, grad_norm=gnorm)
    raise NumericalFailure(
        f"dual Newton solve stalled after {it} iterations (|grad|={gnorm:.3g}, tol={tol:.3g})",
        best=best,
    )


def log_el_ratio(system, theta, pgram, variant: str = "plain",
                 config: ELConfig = DEFAULT_CONFIG, t0=None) -> ELRatio:
    """Scaled statistic ``4 (-log R_n)`` or ``2 (-log R_{n,F})`` at ``theta``.

    Infeasible constraints give ``statistic = inf`` rather than an exception.
    """
    variant = normalize_variant(variant)
    Z = build_constraints(system, theta, pgram, variant)
    try:
        sol = solve_dual(Z, config, t0=t0)
    except InfeasibleError:
        return ELRatio(statistic=np.inf, variant=variant, solution=_infeasible_solution(Z.shape[1]))
    return ELRatio(statistic=statistic_scale(variant) * sol.log_ratio, variant=variant, solution=sol)
