"""Independent reference computations used by the test suite."""

import math

import numpy as np
from scipy.optimize import linprog


def dual_box(Z, margin=1e-9):
    """Bounding box of the dual domain {t : 1 + Z t > 0} by linear programming."""
    N, r = Z.shape
    box = []
    for i in range(r):
        lo_hi = []
        for sign in (1.0, -1.0):
            c = np.zeros(r)
            c[i] = sign
            res = linprog(c, A_ub=-Z, b_ub=np.ones(N) - margin, bounds=[(None, None)] * r,
                          method="highs")
            lo_hi.append(sign * res.fun)
        box.append(tuple(lo_hi))
    return box


def h(t, Z):
    s = 1.0 + Z @ t
    return -math.inf if np.any(s <= 0) else float(np.sum(np.log(s)))


def grid_dual(Z, points=201, rounds=40):
    """Maximise sum log(1 + t'z_j) by repeatedly zoomed dense grids (r <= 2)."""
    Z = np.asarray(Z, dtype=float).reshape(len(Z), -1)
    r = Z.shape[1]
    box = dual_box(Z)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    best = None
    for _ in range(rounds):
        axes = [np.linspace(lo[i], hi[i], points if r == 1 else 81) for i in range(r)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, r)
        S = 1.0 + mesh @ Z.T
        vals = np.where(np.all(S > 0, axis=1), np.sum(np.log(np.clip(S, 1e-300, None)), axis=1), -np.inf)
        k = int(np.argmax(vals))
        best = mesh[k]
        # keep a generous window so elongated ridges are not cut off
        width = (hi - lo) / (len(axes[0]) - 1) * 20
        lo, hi = best - width, best + width
    return best


def naive_chi2_quantile_df2(p):
    return -2.0 * math.log(1.0 - p)
