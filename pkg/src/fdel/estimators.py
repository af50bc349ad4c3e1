"""Estimator-style wrappers around the EL machinery.

These follow the scikit-learn conventions: hyperparameters go to
``__init__``, ``fit`` takes a univariate series and sets attributes with a
trailing underscore, and ``get_params``/``set_params`` come from
``BaseEstimator``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InvalidInputError, InvalidRequestError
from .inference import (
    confidence_region,
    mele,
    test_gof_composite,
    test_gof_simple,
    test_moment_validity,
    test_parameter,
    test_profile,
)
from .models import SpectralFamily, get_family, parse_model
from .spectral import Periodogram, periodogram
from .validation import check_bounds, check_level, check_periodogram, check_system, default_variant

__all__ = ["PeriodogramTransformer", "FDELEstimator", "SpectralGOFTest"]


class PeriodogramTransformer(TransformerMixin, BaseEstimator):
    """Map each row of ``X`` (one series per row) to its periodogram ordinates.

    Parameters
    ----------
    method : {"fft", "naive"}
        Computation path; both agree to rounding error.
    """

    def __init__(self, method="fft"):
        self.method = method

    def fit(self, X, y=None):
        X = self._rows(X)
        self.n_ = X.shape[1]
        self.frequencies_ = check_periodogram(X[0]).frequencies
        return self

    def transform(self, X):
        check_is_fitted(self, "n_")
        X = self._rows(X)
        if X.shape[1] != self.n_:
            raise InvalidInputError(f"series length {X.shape[1]} differs from fitted length {self.n_}")
        return np.vstack([periodogram(row, method=self.method).ordinates for row in X])

    @staticmethod
    def _rows(X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2:
            raise InvalidInputError("X must be a series or a 2-d array of series (one per row)")
        return X


class FDELEstimator(BaseEstimator):
    """Maximum EL estimation and Wilks-calibrated inference for one system.

    Parameters
    ----------
    system : str or EstimatingSystem
        Grammar string (``"acf:1"``, ``"whittle-nf:ar1"``, ...) or an object.
    variant : {"auto", "plain", "mean_corrected", "squared_moment"}
    bounds : sequence of (lo, hi), optional
        Search box for the outer optimisation; the system default otherwise.
    theta_init : array-like, optional
    level : float
        Confidence level for regions and tests (size ``1 - level``).
    restarts : int
        Random restarts of the multi-parameter search.
    random_state : int

    Attributes
    ----------
    theta_ : ndarray
        The MELE.
    statistic_ : float
        ``ell`` at the MELE.
    result_ : MeleResult
    periodogram_ : Periodogram
    variant_ : str
    """

    def __init__(self, system="acf:1", variant="auto", bounds=None, theta_init=None, level=0.95,
                 restarts=3, random_state=0):
        self.system = system
        self.variant = variant
        self.bounds = bounds
        self.theta_init = theta_init
        self.level = level
        self.restarts = restarts
        self.random_state = random_state

    def _setup(self):
        system = check_system(self.system)
        check_level(self.level)
        variant = default_variant(system) if self.variant in (None, "auto") else self.variant
        return system, variant, check_bounds(self.bounds, system.p)

    def fit(self, X, y=None):
        system, variant, bounds = self._setup()
        pg = check_periodogram(X)
        res = mele(system, pg, variant, theta_init=self.theta_init, bounds=bounds,
                   restarts=self.restarts, random_state=self.random_state)
        self.system_ = system
        self.variant_ = res.variant
        self.periodogram_ = pg
        self.result_ = res
        self.theta_ = res.theta
        self.statistic_ = res.statistic
        self.n_features_in_ = 1
        return self

    @property
    def _alpha(self):
        return round(1.0 - self.level, 12)

    def test(self, theta0):
        """``(simple, ratio)`` reports for ``H0: theta = theta0``."""
        check_is_fitted(self, "result_")
        return test_parameter(self.system_, self.periodogram_, theta0, self.variant_, self._alpha,
                              mele_result=self.result_)

    def moment_test(self):
        """Overidentification test; needs ``r > p``."""
        check_is_fitted(self, "result_")
        return test_moment_validity(self.system_, self.periodogram_, self.variant_, self._alpha,
                                    mele_result=self.result_)

    def profile_test(self, fixed):
        check_is_fitted(self, "result_")
        return test_profile(self.system_, self.periodogram_, fixed, self.variant_, self._alpha,
                            bounds=check_bounds(self.bounds, self.system_.p), restarts=self.restarts,
                            mele_result=self.result_, random_state=self.random_state)

    def confidence_region(self, resolution=None):
        check_is_fitted(self, "result_")
        return confidence_region(self.system_, self.periodogram_, self.variant_, level=self.level,
                                 bounds=check_bounds(self.bounds, self.system_.p),
                                 resolution=resolution, mele_result=self.result_)

    def score(self, X, y=None):
        """Negative EL statistic of ``X`` at the fitted parameter (higher is better)."""
        check_is_fitted(self, "result_")
        simple, _ = test_parameter(self.system_, check_periodogram(X), self.theta_, self.variant_,
                                   self._alpha, mele_result=self.result_)
        return -simple.statistic


class SpectralGOFTest(BaseEstimator):
    """Goodness-of-fit test of a spectral density.

    Give exactly one of ``f0`` (a simple null, model or grammar string) or
    ``family`` (a composite null for Gaussian data).
    """

    def __init__(self, f0=None, family=None, level=0.95, restarts=3):
        self.f0 = f0
        self.family = family
        self.level = level
        self.restarts = restarts

    def fit(self, X, y=None):
        check_level(self.level)
        if (self.f0 is None) == (self.family is None):
            raise InvalidRequestError("give exactly one of f0 or family")
        pg = X if isinstance(X, Periodogram) else check_periodogram(X)
        alpha = round(1.0 - self.level, 12)
        if self.f0 is not None:
            f0 = parse_model(self.f0) if isinstance(self.f0, str) else self.f0
            self.report_ = test_gof_simple(f0, pg, alpha)
        else:
            fam = self.family if isinstance(self.family, SpectralFamily) else get_family(self.family)
            self.report_ = test_gof_composite(fam, pg, alpha, restarts=self.restarts)
        self.statistic_ = self.report_.statistic
        self.p_value_ = self.report_.p_value
        self.reject_ = self.report_.reject
        return self
