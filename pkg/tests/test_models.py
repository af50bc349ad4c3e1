import math

import numpy as np
import pytest
from scipy.integrate import quad

from fdel.exceptions import InvalidInputError
from fdel.models import (
    SpectralModel,
    autocovariance,
    density_eval,
    get_family,
    ma_weights,
    parse_model,
    simulate_gaussian,
    simulate_linear,
)

TWO_PI = 2 * math.pi

ALL_MODELS = [
    SpectralModel.white(1.3),
    SpectralModel.ar1(0.5, 1.0),
    SpectralModel.ar1(-0.7, 2.0),
    SpectralModel.arma(ar=(0.5, -0.2), ma=(0.4,), var=1.0),
    SpectralModel.farima(0.2, var=1.0),
    SpectralModel.farima(0.3, ar=(0.3,), ma=(0.2,), var=1.5),
    SpectralModel.fgn(0.7, 1.0),
    SpectralModel.fgn(0.9, 2.0),
    SpectralModel.fgn(0.95, 1.0),
]


def quad_acvf(model, k):
    # r(k) = 2 int_0^pi cos(k lam) f(lam) d lam, with an algebraic weight at the pole
    if model.long_memory:
        a = model.memory_exponent
        # the weighted rule may touch the endpoint; the product is finite there
        g = lambda lam: np.cos(k * lam) * model.density(np.array([max(lam, 1e-12)]))[0] * max(lam, 1e-12)**a
        val, _ = quad(g, 0, math.pi, weight="alg", wvar=(-a, 0), limit=400, epsabs=1e-13)
    else:
        g = lambda lam: np.cos(k * lam) * model.density(np.array([lam]))[0]
        val, _ = quad(g, 0, math.pi, limit=400, epsabs=1e-13)
    return 2 * val


class TestDensity:
    def test_white_flat(self):
        np.testing.assert_allclose(density_eval(SpectralModel.white(TWO_PI), np.linspace(0.1, 3, 7)), 1.0)

    def test_ar1_at_pi(self):
        assert density_eval(SpectralModel.ar1(0.5, TWO_PI), np.array([math.pi]))[0] == pytest.approx(4 / 9, rel=1e-12)

    def test_farima_at_pi(self):
        f = density_eval(SpectralModel.farima(0.25, var=TWO_PI), np.array([math.pi]))[0]
        assert f == pytest.approx(2**-0.5, rel=1e-12)

    @pytest.mark.parametrize("model", [SpectralModel.farima(0.3), SpectralModel.fgn(0.8)])
    def test_pole_at_zero(self, model):
        with pytest.raises(InvalidInputError):
            density_eval(model, np.array([0.0, 0.5]))

    @pytest.mark.invariant
    @pytest.mark.parametrize("d", [0.1, 0.3, 0.45])
    def test_farima_low_frequency_law(self, d):
        m = SpectralModel.farima(d, ar=(0.4,), var=1.0)
        f3, f4 = density_eval(m, np.array([1e-3, 1e-4]))
        assert (f4 / f3) / (10 ** (2 * d)) == pytest.approx(1.0, rel=0.02)
        # f(lam) lam^{2d} -> sigma^2/(2 pi) |1/(1 - 0.4)|^2
        assert f4 * 1e-4 ** (2 * d) == pytest.approx(1 / TWO_PI / 0.6**2, rel=0.02)

    def test_fgn_low_frequency_law(self):
        H = 0.8
        f3, f4 = density_eval(SpectralModel.fgn(H), np.array([1e-3, 1e-4]))
        assert (f4 / f3) / 10 ** (2 * H - 1) == pytest.approx(1.0, rel=0.02)


class TestAutocovariance:
    def test_white(self):
        np.testing.assert_array_equal(autocovariance(SpectralModel.white(2.5), 4), [2.5, 0, 0, 0, 0])

    def test_fgn_lag1(self):
        r = autocovariance(SpectralModel.fgn(0.7, 1.0), 1)
        assert r[0] == pytest.approx(1.0)
        assert r[1] == pytest.approx((2**1.4 - 2) / 2, rel=1e-12)
        assert r[1] == pytest.approx(0.31951, abs=5e-6)

    def test_farima_rho1(self):
        r = autocovariance(SpectralModel.farima(0.2), 1)
        assert r[1] / r[0] == pytest.approx(0.25, rel=1e-12)

    def test_ar1_geometric(self):
        r = autocovariance(SpectralModel.ar1(0.5, 1.0), 5)
        np.testing.assert_allclose(r, 0.5 ** np.arange(6) / 0.75, rtol=1e-12)

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.describe())
    def test_density_integrates_to_variance(self, model):
        assert quad_acvf(model, 0) == pytest.approx(autocovariance(model, 0)[0], rel=1e-4)

    @pytest.mark.invariant
    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.describe())
    def test_quadrature_consistency(self, model):
        r = autocovariance(model, 5)
        for k in range(6):
            assert quad_acvf(model, k) == pytest.approx(r[k], rel=1e-3, abs=1e-3 * r[0])


class TestSimulation:
    def test_white_variance(self):
        x = simulate_gaussian(SpectralModel.white(1.0), 4096, 1)
        assert 0.92 <= x.var() <= 1.08

    def test_ar1_lag1(self):
        x = simulate_gaussian(SpectralModel.ar1(0.5), 8192, 2)
        x = x - x.mean()
        rho = np.dot(x[1:], x[:-1]) / np.dot(x, x)
        assert 0.45 <= rho <= 0.55

    def test_bit_identical(self):
        m = SpectralModel.farima(0.3)
        a = simulate_gaussian(m, 1000, 7)
        b = simulate_gaussian(m, 1000, 7)
        assert a.tobytes() == b.tobytes()

    @pytest.mark.parametrize("model", [SpectralModel.ar1(0.5), SpectralModel.farima(0.3),
                                       SpectralModel.fgn(0.8)], ids=lambda m: m.describe())
    @pytest.mark.invariant
    def test_empirical_autocovariance(self, model):
        reps, n = 200, 2048
        true = autocovariance(model, 3)
        est = np.empty((reps, 4))
        for i in range(reps):
            x = simulate_gaussian(model, n, np.random.SeedSequence(99, spawn_key=(i,)))
            # known zero mean
            est[i] = [np.dot(x[k:], x[: n - k]) / n for k in range(4)]
        se = est.std(axis=0, ddof=1) / math.sqrt(reps)
        bias = (n - np.arange(4)) / n * true
        assert np.all(np.abs(est.mean(axis=0) - bias) <= 3 * se)

    def test_linear_identity(self):
        x = simulate_linear([1.0], 1000, 3)
        assert x.shape == (1000,)
        assert abs(x.mean()) < 0.15

    def test_ma1_variance(self):
        x = simulate_linear([1.0, 0.5], 16384, 4)
        assert x.var() == pytest.approx(1.25, rel=0.05)

    def test_chi2_innovations_skewed(self):
        x = simulate_linear([1.0], 20000, 5, variance=2.0, innovations="chi2")
        assert x.var() == pytest.approx(2.0, rel=0.1)
        assert np.mean((x - x.mean()) ** 3) > 1.0

    def test_bad_leading_weight(self):
        with pytest.raises(InvalidInputError):
            simulate_linear([0.5, 1.0], 10, 0)

    def test_ma_weights_farima(self):
        b = ma_weights(SpectralModel.farima(0.3), 3)
        np.testing.assert_allclose(b, [1, 0.3, 0.3 * 1.3 / 2, 0.3 * 1.3 * 2.3 / 6])


class TestValidationAndGrammar:
    @pytest.mark.parametrize("ctor", [
        lambda: SpectralModel.ar1(1.0),
        lambda: SpectralModel.farima(0.5),
        lambda: SpectralModel.farima(0.0),
        lambda: SpectralModel.fgn(0.5),
        lambda: SpectralModel.white(-1),
        lambda: SpectralModel.arma(ar=(1.2,)),
    ])
    def test_invalid_parameters(self, ctor):
        with pytest.raises(InvalidInputError):
            ctor()

    @pytest.mark.parametrize("text,expected", [
        ("white(2)", SpectralModel.white(2.0)),
        ("white:1.0", SpectralModel.white(1.0)),
        ("ar1(0.5,1)", SpectralModel.ar1(0.5, 1.0)),
        ("arma(1,1;0.5;0.3;2)", SpectralModel.arma(ar=(0.5,), ma=(0.3,), var=2.0)),
        ("farima(0,0.3,0;var=1)", SpectralModel.farima(0.3, var=1.0)),
        ("fgn(0.7,1)", SpectralModel.fgn(0.7, 1.0)),
    ])
    def test_parse_model(self, text, expected):
        assert parse_model(text) == expected

    @pytest.mark.parametrize("text", ["bogus(1)", "ar1()", "ar1(x)", "farima(0,0.7,0)", "(("])
    def test_parse_model_errors(self, text):
        with pytest.raises(InvalidInputError):
            parse_model(text)

    def test_describe_round_trip(self):
        for m in ALL_MODELS:
            assert parse_model(m.describe()) == m

    def test_families(self):
        assert get_family("ar1").param_names == ("sigma2", "phi")
        assert get_family("arma(1,1)").n_params == 3
        with pytest.raises(InvalidInputError):
            get_family("nope")

    @pytest.mark.parametrize("name,theta", [("ar1", [1.3, 0.4]), ("farima", [0.8, 0.3]),
                                            ("arma(1,1)", [1.1, 0.5, 0.2])])
    def test_inverse_density_gradient(self, name, theta):
        fam = get_family(name)
        lam = np.linspace(0.2, 3.0, 10)
        g = fam.inv_density_grad(np.array(theta), lam)
        for i in range(1, len(theta)):
            h = 1e-6
            tp, tm = np.array(theta, float), np.array(theta, float)
            tp[i] += h
            tm[i] -= h
            fd = (1 / fam.density(tp, lam) - 1 / fam.density(tm, lam)) / (2 * h)
            np.testing.assert_allclose(g[:, i - 1], fd, rtol=1e-5, atol=1e-7)

    def test_ar1_inverse_gradient_vanishes(self):
        g = get_family("ar1").inv_density_grad(np.array([1.0, 0.5]), np.array([math.pi / 3]))
        assert abs(g[0, 0]) < 1e-12

    def test_kolmogorov_normalization(self):
        # int log f = 2 pi log(sigma^2 / 2 pi) for every family member
        for name, theta in [("ar1", [1.7, 0.6]), ("farima", [0.9, 0.35]), ("arma(1,1)", [2.0, 0.3, 0.5])]:
            fam = get_family(name)
            val, _ = quad(lambda l: math.log(fam.density(np.array(theta), np.array([l]))[0]),
                          0, math.pi, limit=400)
            assert 2 * val == pytest.approx(TWO_PI * math.log(theta[0] / TWO_PI), abs=1e-6)
