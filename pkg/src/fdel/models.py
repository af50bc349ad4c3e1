"""Parametric spectral densities, autocovariances and path simulators.

Densities follow the convention ``r(k) = int_{-pi}^{pi} cos(k lam) f(lam) dlam``,
so an ARMA/FARIMA density carries the factor ``sigma^2 / (2 pi)`` where
``sigma^2`` is the innovation variance. The ``var`` of a fractional Gaussian
noise is the marginal variance of the process.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .exceptions import EmbeddingFailure, InvalidInputError

__all__ = [
    "SpectralModel",
    "SpectralFamily",
    "FAMILIES",
    "get_family",
    "density_eval",
    "autocovariance",
    "simulate_gaussian",
    "simulate_linear",
    "ma_weights",
    "parse_model",
]

KINDS = ("white", "ar1", "arma", "farima", "fgn")

_FGN_TERMS = 200
_PSI_TOL = 1e-15
_PSI_MAX = 20000


def _check_stationary(ar, label):
    if not ar:
        return
    # roots of 1 - phi_1 z - ... - phi_p z^p
    coefs = np.r_[-np.asarray(ar, dtype=float)[::-1], 1.0]
    roots = np.roots(coefs)
    if np.any(np.abs(roots) <= 1.0 + 1e-10):
        raise InvalidInputError(f"{label} polynomial has a root on or inside the unit circle")


@dataclass(frozen=True)
class SpectralModel:
    """A parametric stationary model.

    Attributes
    ----------
    kind : {"white", "ar1", "arma", "farima", "fgn"}
    ar, ma : tuple of float
        Coefficients of ``1 - sum ar_j z^j`` and ``1 + sum ma_j z^j``.
    d : float
        Fractional differencing order, FARIMA only.
    hurst : float
        Hurst index, fGn only.
    variance : float
        Innovation variance (marginal variance for fGn).
    kurtosis : float
        Fourth-order innovation cumulant; metadata, 0 for Gaussian paths.
    """

    kind: str
    ar: tuple = ()
    ma: tuple = ()
    d: float = 0.0
    hurst: float = 0.5
    variance: float = 1.0
    kurtosis: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown model kind {self.kind!r}")
        object.__setattr__(self, "ar", tuple(float(a) for a in self.ar))
        object.__setattr__(self, "ma", tuple(float(b) for b in self.ma))
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise InvalidInputError("variance must be positive")
        if self.kind == "white" and (self.ar or self.ma):
            raise InvalidInputError("white noise takes no ARMA coefficients")
        if self.kind == "ar1":
            if len(self.ar) != 1 or self.ma:
                raise InvalidInputError("ar1 takes exactly one AR coefficient")
            if not abs(self.ar[0]) < 1:
                raise InvalidInputError("ar1 requires |phi| < 1")
        if self.kind == "farima" and not 0 < self.d < 0.5:
            raise InvalidInputError("farima requires 0 < d < 1/2")
        if self.kind == "fgn" and not 0.5 < self.hurst < 1:
            raise InvalidInputError("fgn requires 1/2 < H < 1")
        if self.kind in ("arma", "farima"):
            _check_stationary(self.ar, "AR")
            _check_stationary(self.ma and tuple(-b for b in self.ma), "MA")

    # convenience constructors -------------------------------------------
    @classmethod
    def white(cls, var=1.0):
        return cls("white", variance=var)

    @classmethod
    def ar1(cls, phi, var=1.0):
        return cls("ar1", ar=(phi,), variance=var)

    @classmethod
    def arma(cls, ar=(), ma=(), var=1.0):
        return cls("arma", ar=tuple(ar), ma=tuple(ma), variance=var)

    @classmethod
    def farima(cls, d, ar=(), ma=(), var=1.0):
        return cls("farima", ar=tuple(ar), ma=tuple(ma), d=d, variance=var)

    @classmethod
    def fgn(cls, hurst, var=1.0):
        return cls("fgn", hurst=hurst, variance=var)

    @property
    def long_memory(self) -> bool:
        return self.kind in ("farima", "fgn")

    @property
    def memory_exponent(self) -> float:
        """The ``alpha`` of ``f(lam) ~ C |lam|^-alpha`` near zero."""
        if self.kind == "farima":
            return 2.0 * self.d
        if self.kind == "fgn":
            return 2.0 * self.hurst - 1.0
        return 0.0

    def density(self, lam):
        return density_eval(self, lam)

    def autocovariance(self, max_lag):
        return autocovariance(self, max_lag)

    def describe(self) -> str:
        if self.kind == "white":
            return f"white({self.variance:g})"
        if self.kind == "ar1":
            return f"ar1({self.ar[0]:g},{self.variance:g})"
        if self.kind == "fgn":
            return f"fgn({self.hurst:g},{self.variance:g})"
        ar = ",".join(f"{a:g}" for a in self.ar)
        ma = ",".join(f"{b:g}" for b in self.ma)
        if self.kind == "arma":
            return f"arma({len(self.ar)},{len(self.ma)};{ar};{ma};var={self.variance:g})"
        return f"farima({len(self.ar)},{self.d:g},{len(self.ma)};{ar};{ma};var={self.variance:g})"


def _arma_gain(ar, ma, lam):
    """``|1 + sum ma_j e^{ij lam}|^2 / |1 - sum ar_j e^{ij lam}|^2``."""
    z = np.exp(1j * lam)
    num = np.ones_like(z)
    for j, b in enumerate(ma, start=1):
        num = num + b * z**j
    den = np.ones_like(z)
    for j, a in enumerate(ar, start=1):
        den = den - a * z**j
    return np.abs(num) ** 2 / np.abs(den) ** 2


def _fgn_sum(hurst, lam):
    a = 1.0 + 2.0 * hurst
    k = np.arange(-_FGN_TERMS, _FGN_TERMS + 1)
    total = np.sum(np.abs(lam[..., None] + 2.0 * np.pi * k) ** (-a), axis=-1)
    # midpoint integral for |k| > _FGN_TERMS
    edge = 2.0 * np.pi * (_FGN_TERMS + 0.5)
    tail = ((edge + lam) ** (1 - a) + (edge - lam) ** (1 - a)) / (2.0 * np.pi * (a - 1))
    return total + tail


def density_eval(model: SpectralModel, lam):
    """Spectral density ``f(lam)`` of ``model`` (scalar or array input)."""
    lam_arr = np.abs(np.asarray(lam, dtype=float))
    if np.any(lam_arr > np.pi + 1e-12):
        raise InvalidInputError("frequencies must lie in [-pi, pi]")
    if model.long_memory and np.any(lam_arr == 0):
        raise InvalidInputError(f"{model.kind} density has a pole at frequency 0")
    s2 = model.variance
    if model.kind == "white":
        out = np.full(lam_arr.shape, s2 / (2.0 * np.pi))
    elif model.kind in ("ar1", "arma"):
        out = s2 / (2.0 * np.pi) * _arma_gain(model.ar, model.ma, lam_arr)
    elif model.kind == "farima":
        base = (2.0 * np.sin(lam_arr / 2.0)) ** (-2.0 * model.d)
        out = s2 / (2.0 * np.pi) * base * _arma_gain(model.ar, model.ma, lam_arr)
    else:
        H = model.hurst
        const = s2 * np.exp(gammaln(2 * H + 1)) * np.sin(np.pi * H) / (2.0 * np.pi)
        # 4 sin^2(lam/2) avoids the cancellation in 2 (1 - cos lam) near zero
        out = const * 4.0 * np.sin(lam_arr / 2.0) ** 2 * _fgn_sum(H, np.atleast_1d(lam_arr)).reshape(lam_arr.shape)
    if np.ndim(lam) == 0:
        return float(out)
    return out


def _psi_weights(ar, ma, limit=None):
    """Causal MA(inf) weights of ``(1 + ma(B)) / (1 - ar(B))``, truncated."""
    ar = np.asarray(ar, dtype=float)
    ma = np.asarray(ma, dtype=float)
    if ar.size == 0:
        return np.r_[1.0, ma] if limit is None else np.r_[1.0, ma, np.zeros(max(0, limit - ma.size))][: limit + 1]
    cap = _PSI_MAX if limit is None else limit
    psi = [1.0]
    for j in range(1, cap + 1):
        v = ma[j - 1] if j <= ma.size else 0.0
        for i in range(1, min(j, ar.size) + 1):
            v += ar[i - 1] * psi[j - i]
        psi.append(v)
        if limit is None and j > max(ma.size, ar.size) + 10:
            if max(abs(x) for x in psi[-ar.size - 1 :]) < _PSI_TOL:
                break
    return np.asarray(psi)


def _farima0_acvf(d, s2, K):
    r = np.empty(K + 1)
    r[0] = s2 * np.exp(gammaln(1 - 2 * d) - 2 * gammaln(1 - d))
    k = np.arange(K)
    r[1:] = r[0] * np.cumprod((k + d) / (k + 1 - d))
    return r


def autocovariance(model: SpectralModel, max_lag: int) -> np.ndarray:
    """Return ``r(0), ..., r(max_lag)`` consistent with :func:`density_eval`."""
    if int(max_lag) != max_lag or max_lag < 0:
        raise InvalidInputError("max_lag must be a nonnegative integer")
    K = int(max_lag)
    k = np.arange(K + 1)
    s2 = model.variance
    if model.kind == "white":
        r = np.zeros(K + 1)
        r[0] = s2
        return r
    if model.kind == "ar1":
        phi = model.ar[0]
        return s2 * phi**k / (1.0 - phi**2)
    if model.kind == "fgn":
        h2 = 2.0 * model.hurst
        return 0.5 * s2 * (np.abs(k + 1.0) ** h2 - 2.0 * np.abs(k) ** h2 + np.abs(k - 1.0) ** h2)
    psi = _psi_weights(model.ar, model.ma)
    L = psi.size - 1
    # c(h) = sum_i psi_i psi_{i+h}
    c = np.correlate(psi, psi, mode="full")[L:]
    if model.kind == "arma":
        r = np.zeros(K + 1)
        m = min(K, L)
        r[: m + 1] = s2 * c[: m + 1]
        return r
    base = _farima0_acvf(model.d, s2, K + L)
    if L == 0:
        return base[: K + 1]
    h = np.arange(-L, L + 1)
    w = c[np.abs(h)]
    return np.array([np.dot(w, base[np.abs(kk + h)]) for kk in k])


def ma_weights(model: SpectralModel, m: int) -> np.ndarray:
    """First ``m + 1`` moving-average weights ``b_0 = 1, b_1, ..., b_m``."""
    if model.kind == "fgn":
        raise InvalidInputError("fgn has no closed-form moving-average representation here")
    if model.kind == "white":
        return np.r_[1.0, np.zeros(m)]
    psi = _psi_weights(model.ar, model.ma, limit=m)[: m + 1]
    if model.kind != "farima":
        return psi
    j = np.arange(1, m + 1)
    frac = np.r_[1.0, np.cumprod((j - 1 + model.d) / j)]
    return np.convolve(frac, psi)[: m + 1]


@lru_cache(maxsize=64)
def _circulant_sqrt_eigs(model: SpectralModel, n: int):
    m = 2 * n
    while m <= 16 * n:
        half = m // 2
        r = autocovariance(model, half)
        row = np.r_[r, r[-2:0:-1]]
        eig = np.fft.fft(row).real
        if eig.min() >= -1e-10 * eig.max():
            eig = np.clip(eig, 0.0, None)
            out = np.sqrt(eig / m)
            out.setflags(write=False)
            return out
        m *= 2
    raise EmbeddingFailure(
        f"circulant embedding of {model.describe()} has negative eigenvalues up to size {16 * n}"
    )


def simulate_gaussian(model: SpectralModel, n: int, seed=None) -> np.ndarray:
    """Exact stationary Gaussian path of length ``n`` by circulant embedding.

    The embedding starts at size ``2n`` and doubles up to ``16n`` until all
    circulant eigenvalues are nonnegative. ``seed`` is anything
    :func:`numpy.random.default_rng` accepts, so a ``SeedSequence`` works.
    """
    if int(n) != n or n < 1:
        raise InvalidInputError("n must be a positive integer")
    n = int(n)
    root = _circulant_sqrt_eigs(model, n)
    rng = np.random.default_rng(seed)
    m = root.size
    w = root * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    return np.fft.fft(w).real[:n]


def simulate_linear(coeffs, n: int, seed=None, variance: float = 1.0,
                    innovations: str = "gaussian") -> np.ndarray:
    """Moving-average path ``X_t = sum_{j=0}^m b_j eps_{t-j}``.

    ``innovations="chi2"`` draws centred, scaled chi-square(1) variates with
    the requested variance (fourth cumulant ``12 * variance**2``).
    """
    b = np.asarray(coeffs, dtype=float).ravel()
    if b.size == 0 or b[0] != 1.0:
        raise InvalidInputError("moving-average weights must start with b_0 = 1")
    if variance <= 0:
        raise InvalidInputError("innovation variance must be positive")
    rng = np.random.default_rng(seed)
    total = int(n) + b.size - 1
    if innovations == "gaussian":
        eps = rng.standard_normal(total)
    elif innovations == "chi2":
        eps = (rng.chisquare(1, total) - 1.0) / np.sqrt(2.0)
    else:
        raise InvalidInputError(f"unknown innovation family {innovations!r}")
    eps *= np.sqrt(variance)
    return np.convolve(eps, b, mode="valid")


# --------------------------------------------------------------------------
# parametric families used by the Whittle estimating systems
# --------------------------------------------------------------------------


class SpectralFamily:
    """Family ``f_theta = sigma^2 k_vartheta`` with ``theta = (sigma^2, vartheta)``.

    ``sigma^2`` is the innovation variance so that Kolmogorov's formula holds
    and the Whittle moment conditions are exact under the model.
    """

    def __init__(self, name, shape_names, shape_bounds, make_model, inv_grad=None):
        self.name = name
        self.shape_names = tuple(shape_names)
        self.shape_bounds = tuple(shape_bounds)
        self._make_model = make_model
        self._inv_grad = inv_grad

    @property
    def param_names(self):
        return ("sigma2",) + self.shape_names

    @property
    def n_params(self):
        return 1 + len(self.shape_names)

    def to_model(self, theta) -> SpectralModel:
        theta = np.asarray(theta, dtype=float).ravel()
        return self._make_model(float(theta[0]), theta[1:])

    def density(self, theta, lam):
        theta = np.asarray(theta, dtype=float).ravel()
        if theta[0] <= 0:
            raise InvalidInputError("sigma2 must be positive")
        return density_eval(self.to_model(theta), lam)

    def inv_density_grad(self, theta, lam):
        """``d f_theta^{-1} / d vartheta`` as an array of shape ``(len(lam), p-1)``."""
        theta = np.asarray(theta, dtype=float).ravel()
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if self._inv_grad is not None:
            return self._inv_grad(theta, lam)
        cols = []
        for i in range(1, theta.size):
            h = 1e-6 * max(1.0, abs(theta[i]))
            up, dn = theta.copy(), theta.copy()
            up[i] += h
            dn[i] -= h
            cols.append((1.0 / self.density(up, lam) - 1.0 / self.density(dn, lam)) / (2 * h))
        return np.column_stack(cols) if cols else np.empty((lam.size, 0))

    def whittle_estimate(self, pgram):
        """Discrete Whittle fit with ``sigma^2`` profiled out."""
        from scipy.optimize import minimize

        lam, I = pgram.frequencies, pgram.ordinates

        def profile(shape):
            try:
                k = self.density(np.r_[1.0, shape], lam)
            except InvalidInputError:
                return np.inf
            return np.log(np.mean(I / k)) + np.mean(np.log(k))

        if not self.shape_names:
            shape = np.empty(0)
        else:
            x0 = np.array([0.5 * (lo + hi) if np.isfinite(lo + hi) else 0.0
                           for lo, hi in self.shape_bounds])
            res = minimize(profile, x0, method="Nelder-Mead", bounds=self.shape_bounds,
                           options={"xatol": 1e-6, "fatol": 1e-10})
            shape = np.asarray(res.x, dtype=float)
        k = self.density(np.r_[1.0, shape], lam)
        return np.r_[np.mean(I / k), shape]

    def default_bounds(self, pgram, sigma2_factor=20.0):
        theta = self.whittle_estimate(pgram)
        s2 = theta[0]
        return [(s2 / sigma2_factor, s2 * sigma2_factor)] + list(self.shape_bounds)

    def __repr__(self):
        return f"SpectralFamily({self.name!r})"


def _ar1_inv_grad(theta, lam):
    s2, phi = theta[0], theta[1]
    return (2.0 * np.pi / s2 * (2.0 * phi - 2.0 * np.cos(lam)))[:, None]


def _farima_inv_grad(theta, lam):
    s2, d = theta[0], theta[1]
    base = 2.0 * np.sin(lam / 2.0)
    return (2.0 * np.pi / s2 * base ** (2 * d) * 2.0 * np.log(base))[:, None]


def _arma_family(p, q):
    names = [f"ar{i}" for i in range(1, p + 1)] + [f"ma{i}" for i in range(1, q + 1)]
    bounds = [(-0.99, 0.99)] * (p + q)

    def make(s2, shape):
        return SpectralModel.arma(ar=shape[:p], ma=shape[p:], var=s2)

    def inv_grad(theta, lam):
        # f^{-1} = 2 pi / s2 |A|^2 / |B|^2 with A = 1 - sum phi z^j, B = 1 + sum theta z^j
        s2, phi, th = theta[0], theta[1 : p + 1], theta[p + 1 :]
        z = np.exp(1j * np.outer(lam, np.arange(1, max(p, q) + 1)))
        A = 1.0 - z[:, :p] @ phi
        B = 1.0 + z[:, :q] @ th
        a2, b2 = np.abs(A) ** 2, np.abs(B) ** 2
        c = 2.0 * np.pi / s2
        d_phi = -2.0 * np.real(np.conj(A)[:, None] * z[:, :p]) / b2[:, None]
        d_th = -a2[:, None] * 2.0 * np.real(np.conj(B)[:, None] * z[:, :q]) / (b2**2)[:, None]
        return c * np.column_stack([d_phi, d_th])

    return SpectralFamily(f"arma({p},{q})", names, bounds, make, inv_grad)


FAMILIES = {
    "white": SpectralFamily("white", (), (), lambda s2, _: SpectralModel.white(s2)),
    "ar1": SpectralFamily("ar1", ("phi",), ((-0.99, 0.99),),
                          lambda s2, sh: SpectralModel.ar1(sh[0], s2), _ar1_inv_grad),
    "farima": SpectralFamily("farima", ("d",), ((0.01, 0.49),),
                             lambda s2, sh: SpectralModel.farima(sh[0], var=s2), _farima_inv_grad),
}


def get_family(name: str) -> SpectralFamily:
    """Look up a family by name; ``arma(p,q)`` is built on demand."""
    key = name.strip().lower()
    if key in FAMILIES:
        return FAMILIES[key]
    m = re.fullmatch(r"arma\((\d+),(\d+)\)", key.replace(" ", ""))
    if m:
        return _arma_family(int(m.group(1)), int(m.group(2)))
    raise InvalidInputError(f"unknown spectral family {name!r}")


# --------------------------------------------------------------------------
# model grammar: white(var), ar1(phi,var), arma(p,q;phis;thetas;var),
# farima(p,d,q;phis;thetas;var), fgn(H,var); "name:args" also accepted
# --------------------------------------------------------------------------


def _floats(text, what):
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InvalidInputError(f"bad number list {text!r} in {what}") from None


def parse_model(text: str) -> SpectralModel:
    """Parse a model description such as ``farima(0,0.3,0;var=1)``."""
    src = text.strip()
    m = re.fullmatch(r"([a-zA-Z0-9]+)\s*(?:\((.*)\)|:(.*))?", src)
    if not m:
        raise InvalidInputError(f"cannot parse model {text!r}")
    name = m.group(1).lower()
    body = m.group(2) if m.group(2) is not None else (m.group(3) or "")
    groups = [g.strip() for g in body.split(";")] if body.strip() else []
    keywords = {}
    positional = []
    for g in groups:
        if "=" in g:
            for item in g.split(","):
                key, _, val = item.partition("=")
                try:
                    keywords[key.strip().lower()] = float(val)
                except ValueError:
                    raise InvalidInputError(f"bad value in {text!r}") from None
        else:
            positional.append(g)
    var = keywords.pop("var", None)
    try:
        if name in ("white", "wn"):
            args = _floats(positional[0], text) if positional else []
            return SpectralModel.white(var if var is not None else (args[0] if args else 1.0))
        if name == "ar1":
            args = _floats(positional[0], text) if positional else []
            phi = keywords.pop("phi", args[0] if args else None)
            if phi is None:
                raise InvalidInputError("ar1 needs phi")
            return SpectralModel.ar1(phi, var if var is not None else (args[1] if len(args) > 1 else 1.0))
        if name == "fgn":
            args = _floats(positional[0], text) if positional else []
            H = keywords.pop("h", args[0] if args else None)
            if H is None:
                raise InvalidInputError("fgn needs H")
            return SpectralModel.fgn(H, var if var is not None else (args[1] if len(args) > 1 else 1.0))
        if name in ("arma", "farima"):
            if not positional:
                raise InvalidInputError(f"{name} needs its orders")
            head = _floats(positional[0], text)
            if name == "arma":
                if len(head) != 2:
                    raise InvalidInputError("arma expects arma(p,q;...)")
                p, q = head
                d = None
            else:
                if len(head) != 3:
                    raise InvalidInputError("farima expects farima(p,d,q;...)")
                p, d, q = head
            p, q = int(p), int(q)
            rest = positional[1:]
            # an empty slot stands for a zero-order coefficient list
            phis = _floats(rest.pop(0), text) if rest and (p > 0 or not rest[0]) else []
            thetas = _floats(rest.pop(0), text) if rest and (q > 0 or not rest[0]) else []
            if rest and var is None:
                tail = _floats(rest.pop(0), text)
                var = tail[0] if tail else None
            if rest:
                raise InvalidInputError(f"too many fields in {text!r}")
            if len(phis) != p or len(thetas) != q:
                raise InvalidInputError(f"coefficient counts do not match orders in {text!r}")
            var = 1.0 if var is None else var
            if name == "arma":
                return SpectralModel.arma(phis, thetas, var)
            return SpectralModel.farima(d, phis, thetas, var)
    except IndexError:
        raise InvalidInputError(f"missing arguments in {text!r}") from None
    raise InvalidInputError(f"unknown model {name!r}")
