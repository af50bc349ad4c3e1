import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from fdel.estimating import (
    acf_power_system,
    autocorrelation_system,
    gof_composite_system,
    spectral_cdf_system,
    whittle_nuisance_free_system,
)
from fdel.exceptions import InvalidInputError, InvalidRequestError
from fdel.inference import (
    INFEASIBLE_WARNING,
    chi_square_cdf,
    chi_square_quantile,
    chi_square_sf,
    confidence_region,
    mele,
    profile_objective,
    test_constrained as constrained_test,
    test_gof_composite as gof_composite,
    test_gof_simple as gof_simple,
    test_moment_validity as moment_validity,
    test_parameter as parameter_test,
    test_profile as profile_test,
)
from fdel.models import SpectralModel, simulate_gaussian
from fdel.spectral import Periodogram, periodogram

from oracles import naive_chi2_quantile_df2


def series(model, n, seed):
    return periodogram(simulate_gaussian(model, n, np.random.SeedSequence(seed)))


class TestChiSquare:
    def test_df1(self):
        assert chi_square_quantile(1, 0.95) == pytest.approx(3.841458820694124, rel=1e-10)

    def test_df2_closed_form(self):
        assert chi_square_quantile(2, 0.95) == pytest.approx(naive_chi2_quantile_df2(0.95), rel=1e-12)
        assert chi_square_quantile(2, 0.95) == pytest.approx(5.99146, abs=1e-5)

    def test_df1_monte_carlo(self):
        z = np.random.default_rng(0).standard_normal(400_000)
        assert np.quantile(z**2, 0.95) == pytest.approx(chi_square_quantile(1, 0.95), rel=0.01)

    @pytest.mark.invariant
    @pytest.mark.parametrize("df", range(1, 11))
    @pytest.mark.parametrize("p", [0.5, 0.9, 0.95, 0.99])
    def test_round_trip_and_scipy(self, df, p):
        q = chi_square_quantile(df, p)
        assert chi_square_cdf(q, df) == pytest.approx(p, abs=1e-9)
        assert q == pytest.approx(stats.chi2.ppf(p, df), rel=1e-10)

    def test_limits(self):
        assert chi_square_quantile(3, 0.0) == 0.0
        assert chi_square_quantile(3, 1e-300) < 1e-100
        assert chi_square_sf(math.inf, 2) == 0.0
        assert chi_square_sf(0.0, 2) == 1.0
        with pytest.raises(InvalidInputError):
            chi_square_quantile(0, 0.5)

    @pytest.mark.invariant
    @given(st.integers(1, 30), st.floats(1e-6, 1 - 1e-9))
    def test_round_trip_property(self, df, p):
        assert chi_square_cdf(chi_square_quantile(df, p), df) == pytest.approx(p, abs=1e-9)


@pytest.fixture(scope="module")
def ar1_pg():
    return series(SpectralModel.ar1(0.5), 512, 1)


class TestMele:
    def test_just_identified_ratio(self, ar1_pg):
        res = mele(autocorrelation_system([1]), ar1_pg)
        lam, I = ar1_pg.frequencies, ar1_pg.ordinates
        assert res.theta[0] == pytest.approx(np.sum(np.cos(lam) * I) / np.sum(I), abs=1e-7)
        assert res.statistic <= 1e-8

    def test_just_identified_two_lags(self, ar1_pg):
        res = mele(autocorrelation_system([1, 2]), ar1_pg)
        lam, I = ar1_pg.frequencies, ar1_pg.ordinates
        expected = [np.sum(np.cos(k * lam) * I) / np.sum(I) for k in (1, 2)]
        np.testing.assert_allclose(res.theta, expected, atol=1e-6)
        assert res.statistic <= 1e-8

    def test_overidentified_positive(self, ar1_pg):
        res = mele(acf_power_system(2), ar1_pg)
        assert res.statistic > 0
        assert res.statistic < 20

    @pytest.mark.invariant
    def test_first_order_condition(self, ar1_pg):
        system = acf_power_system(3)
        res = mele(system, ar1_pg)
        obj = profile_objective(system, ar1_pg)
        h = 1e-5
        grad = (obj(res.theta + h) - obj(res.theta - h)) / (2 * h)
        assert abs(grad) <= 1e-4 * (1 + abs(res.statistic)) * 100

    def test_whittle_nuisance_free_solves_estimating_equation(self, ar1_pg):
        # sum (2 phi - 2 cos lam_j) I_j = 0 is solved by the ratio estimator
        res = mele(whittle_nuisance_free_system("ar1"), ar1_pg)
        lam, I = ar1_pg.frequencies, ar1_pg.ordinates
        assert res.theta[0] == pytest.approx(np.sum(np.cos(lam) * I) / np.sum(I), abs=1e-7)
        assert res.statistic <= 1e-8

    def test_p_zero_evaluates(self, ar1_pg):
        from fdel.estimating import white_noise_acf_system
        res = mele(white_noise_acf_system(2), ar1_pg)
        assert res.theta.size == 0 and res.statistic > 0


class TestParameterTests:
    def test_at_mele(self, ar1_pg):
        system = autocorrelation_system([1])
        fit = mele(system, ar1_pg)
        simple, lr = parameter_test(system, ar1_pg, fit.theta, mele_result=fit)
        assert simple.statistic == pytest.approx(0, abs=1e-8)
        assert simple.p_value == pytest.approx(1, abs=1e-6)
        assert lr.df == 1

    def test_infeasible_theta0(self, ar1_pg):
        # above cos(lam_1), so every constraint value is negative
        simple, lr = parameter_test(autocorrelation_system([1]), ar1_pg, [0.99999])
        assert simple.statistic == math.inf and simple.p_value == 0 and simple.reject
        assert INFEASIBLE_WARNING in simple.warnings
        assert simple.to_dict()["statistic"] is None

    @pytest.mark.invariant
    def test_lr_decomposition(self, ar1_pg):
        system = acf_power_system(2)
        fit = mele(system, ar1_pg)
        for theta0 in (0.3, 0.45, 0.5, 0.6):
            simple, lr = parameter_test(system, ar1_pg, [theta0], mele_result=fit)
            assert lr.statistic >= -1e-9 and fit.statistic >= -1e-9
            assert simple.statistic == pytest.approx(lr.statistic + lr.extra["statistic_at_mele"], abs=1e-12)

    def test_moment_validity_requires_overidentification(self, ar1_pg):
        with pytest.raises(InvalidRequestError):
            moment_validity(autocorrelation_system([1]), ar1_pg)

    def test_moment_validity_df(self, ar1_pg):
        rep = moment_validity(acf_power_system(3), ar1_pg)
        assert rep.df == 2

    def test_kappa4_warning(self, ar1_pg):
        rep = gof_simple(SpectralModel.ar1(0.5), ar1_pg)
        assert any("fourth" in w for w in rep.warnings)
        simple, _ = parameter_test(autocorrelation_system([1]), ar1_pg, [0.5])
        assert simple.warnings == []


class TestConstrainedAndProfile:
    def test_constraint_satisfied_at_mele(self, ar1_pg):
        system = autocorrelation_system([1, 2])
        fit = mele(system, ar1_pg)
        first, _ = constrained_test(system, ar1_pg, lambda th: np.array([th[0] - fit.theta[0]]))
        assert first.statistic == pytest.approx(0, abs=1e-8)

    def test_q_equal_p_rejected(self, ar1_pg):
        with pytest.raises(InvalidRequestError):
            constrained_test(autocorrelation_system([1]), ar1_pg, lambda th: th - 0.5)
        with pytest.raises(InvalidRequestError):
            profile_test(autocorrelation_system([1]), ar1_pg, {0: 0.5})

    def test_profile_at_mele(self, ar1_pg):
        system = autocorrelation_system([1, 2])
        fit = mele(system, ar1_pg)
        rep = profile_test(system, ar1_pg, {0: fit.theta[0]}, mele_result=fit)
        assert rep.statistic == pytest.approx(0, abs=1e-6)

    def test_profile_infeasible(self, ar1_pg):
        rep = profile_test(autocorrelation_system([1, 2]), ar1_pg, {0: 0.99999})
        assert rep.p_value == 0 and INFEASIBLE_WARNING in rep.warnings

    def test_ar1_identity_size(self):
        # rho(2) = rho(1)^2 and rho(1) = 0.5 both hold for AR(1) data
        system = autocorrelation_system([1, 2])
        model = SpectralModel.ar1(0.5)
        rej_c = rej_p = 0
        reps = 100
        for i in range(reps):
            pg = series(model, 512, 1000 + i)
            fit = mele(system, pg)
            first, _ = constrained_test(system, pg, lambda th: np.array([th[1] - th[0] ** 2]))
            rej_c += first.reject
            rej_p += profile_test(system, pg, {0: 0.5}, mele_result=fit).reject
        assert rej_c / reps <= 0.13
        assert rej_p / reps <= 0.13


class TestRegion:
    def test_interval_contains_mele(self, ar1_pg):
        reg = confidence_region(autocorrelation_system([1]), ar1_pg, level=0.95, bounds=[(-0.99, 0.99)])
        lo, hi = reg.interval
        assert lo < reg.theta_hat[0] < hi
        d = reg.to_dict()
        assert d["endpoints"] == [lo, hi]

    def test_regions_nest_and_reach_feasible_set(self, ar1_pg):
        system = autocorrelation_system([1])
        fit = mele(system, ar1_pg)
        widths = []
        for level in (0.5, 0.9, 0.99, 0.999999):
            reg = confidence_region(system, ar1_pg, level=level, bounds=[(-0.99, 0.99)], mele_result=fit)
            widths.append(reg.interval[1] - reg.interval[0])
        assert widths == sorted(widths)
        # level 1 means an infinite cutoff: the region is every feasible value
        reg = confidence_region(system, ar1_pg, level=1.0, bounds=[(-0.99, 0.99)], mele_result=fit)
        lam, I = ar1_pg.frequencies, ar1_pg.ordinates
        # feasible iff theta lies strictly inside the range of cos(lam_j)
        lo_feas, hi_feas = np.cos(lam).min(), np.cos(lam).max()
        assert reg.interval[0] == pytest.approx(max(lo_feas, -0.99), abs=1e-3)
        assert reg.interval[1] == pytest.approx(min(hi_feas, 0.99), abs=1e-3)

    def test_two_parameter_grid(self, ar1_pg):
        reg = confidence_region(autocorrelation_system([1, 2]), ar1_pg, bounds=[(0.2, 0.7), (0.0, 0.5)],
                                resolution=11)
        assert reg.grid.shape == (121, 2)
        assert np.any(reg.statistics - reg.offset <= reg.cutoff)

    def test_p3_rejected(self, ar1_pg):
        with pytest.raises(InvalidRequestError):
            confidence_region(autocorrelation_system([1, 2, 3]), ar1_pg)

    @pytest.mark.invariant
    @pytest.mark.parametrize("seed", range(4))
    def test_region_test_duality(self, seed):
        system = spectral_cdf_system([1.0]) if seed % 2 else autocorrelation_system([1])
        pg = series(SpectralModel.ar1(0.3), 256, 50 + seed)
        fit = mele(system, pg)
        reg = confidence_region(system, pg, level=0.9, mele_result=fit)
        obj = profile_objective(system, pg)
        rng = np.random.default_rng(seed)
        b = system.bounds(pg)[0]
        checked = 0
        for theta0 in rng.uniform(b[0], b[1], 40):
            gap = obj([theta0]) - fit.statistic - reg.cutoff
            if abs(gap) < 1e-4:
                continue
            _, lr = parameter_test(system, pg, [theta0], alpha=0.1, mele_result=fit)
            inside = any(lo - 1e-9 <= theta0 <= hi + 1e-9 for lo, hi in reg.intervals)
            assert inside == (not lr.reject)
            checked += 1
        assert checked > 30


class TestGoodnessOfFit:
    def test_fixed_point(self):
        f0 = SpectralModel.ar1(0.4, 2.0)
        n = 64
        lam = 2 * np.pi * np.arange(1, 32) / n
        pg = Periodogram(n, f0.density(lam))
        rep = gof_simple(f0, pg)
        assert rep.statistic == pytest.approx(0, abs=1e-12)
        assert rep.extra["B_n"] == pytest.approx(2 * np.pi / n * 31, rel=1e-12)

    def test_nonpositive_f0(self, ar1_pg):
        with pytest.raises(InvalidInputError):
            gof_simple(lambda lam: np.cos(lam), ar1_pg)

    def test_scale_misspecification_detected(self):
        pg = series(SpectralModel.white(1.0), 512, 3)
        rep = gof_simple(lambda lam, m=SpectralModel.white(1.0): 2 * m.density(lam), pg)
        assert rep.reject

    def test_composite_df_one(self, ar1_pg):
        rep = gof_composite("ar1", ar1_pg)
        assert rep.df == 1
        assert rep.extra["param_names"] == ["sigma2", "phi"]
        assert not rep.reject

    def test_composite_misspecified(self):
        pg = series(SpectralModel.ar1(0.6), 1024, 4)
        rep = gof_composite("white", pg)
        assert rep.reject and rep.extra["statistic_per_n"] > 0
