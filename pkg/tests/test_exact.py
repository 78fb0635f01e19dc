import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergm_phase import DomainError, ModelParams, ResourceError, critical_point, find_maximizers
from ergm_phase.exact import (
    brute_force_edge_probability,
    brute_force_psi,
    edge_probability_exact,
    exact_derivatives,
    psi_n,
    sum_vs_integral,
    tilted_binomial,
)
from ergm_phase.asymptotics import limiting_values


def random_params(rng, count, ps=(2, 3), lo=-3.0, hi=3.0):
    return [ModelParams(*rng.uniform(lo, hi, size=2), int(rng.choice(ps))) for _ in range(count)]


class TestTiltedBinomial:
    def test_plain_binomial(self):
        tb = tilted_binomial(ModelParams(0, 0), 4)
        np.testing.assert_allclose(tb.probs, np.array([1, 4, 6, 4, 1]) / 16, rtol=1e-15)

    @pytest.mark.parametrize("n", [1, 7, 100, 12345])
    def test_log_norm_untilted(self, n):
        assert tilted_binomial(ModelParams(0, 0), n).log_norm == pytest.approx(n * math.log(2), rel=1e-14)

    def test_log_weights_definition(self):
        prm = ModelParams(0.4, -1.3, 3)
        n = 30
        i = np.arange(n + 1)
        expected = np.array([math.log(math.comb(n, k)) for k in i]) + prm.beta1 * i + prm.beta2 * i**3 / n**2
        np.testing.assert_allclose(tilted_binomial(prm, n).log_weights, expected, rtol=1e-13, atol=1e-12)

    def test_p2_antidiagonal_symmetry(self):
        tb = tilted_binomial(ModelParams(-2.5, 2.5), 100)
        np.testing.assert_allclose(tb.probs, tb.probs[::-1], rtol=1e-13)

    @pytest.mark.parametrize("n", [10, 10**3, 10**5, 10**6])
    def test_normalization(self, n):
        for prm in (ModelParams(-1.5, 1.5), ModelParams(-2, 2), ModelParams(-2.5, 2.5), ModelParams(1, 3, 4)):
            tb = tilted_binomial(prm, n)
            assert abs(tb.probs.sum() - 1) < 1e-12
            assert math.isfinite(tb.log_norm)

    def test_cdf_monotone(self):
        cdf = tilted_binomial(ModelParams(-3, 3.1), 500).cdf
        assert np.all(np.diff(cdf) >= 0)
        assert cdf[-1] == pytest.approx(1, abs=1e-12)

    def test_read_only(self):
        tb = tilted_binomial(ModelParams(0, 0), 5)
        with pytest.raises(ValueError):
            tb.probs[0] = 1.0

    def test_resource_cap(self):
        with pytest.raises(ResourceError):
            tilted_binomial(ModelParams(0, 0), 1000, max_entries=100)

    def test_bad_n(self):
        with pytest.raises(DomainError):
            tilted_binomial(ModelParams(0, 0), 0)

    def test_extreme_parameters_finite(self):
        tb = tilted_binomial(ModelParams(-40, 80, 3), 10**5)
        assert math.isfinite(tb.log_norm)
        assert abs(tb.probs.sum() - 1) < 1e-12


class TestBruteForceOracle:
    def test_trivial(self):
        assert brute_force_psi(ModelParams(0, 0), 3) == pytest.approx(math.log(2), rel=1e-15)

    @pytest.mark.parametrize("prm,n", [(ModelParams(0.3, -0.2, 2), 3), (ModelParams(-1, 1, 3), 4)])
    def test_examples(self, prm, n):
        assert abs(psi_n(prm, n) - brute_force_psi(prm, n)) < 1e-10

    def test_random_points(self):
        rng = np.random.default_rng(11)
        for prm in random_params(rng, 50):
            for n in (2, 3, 4):
                assert abs(psi_n(prm, n) - brute_force_psi(prm, n)) < 1e-10

    def test_edge_probability(self):
        rng = np.random.default_rng(12)
        for prm in random_params(rng, 10):
            for n in (2, 3):
                assert abs(edge_probability_exact(prm, n) - brute_force_edge_probability(prm, n)) < 1e-10

    def test_limits(self):
        with pytest.raises(DomainError):
            brute_force_psi(ModelParams(0, 0), 5)
        with pytest.raises(DomainError):
            brute_force_edge_probability(ModelParams(0, 0), 1)


class TestDerivatives:
    @pytest.mark.parametrize("n", [1, 10, 10**4])
    def test_trivial(self, n):
        d = exact_derivatives(ModelParams(0, 0), n)
        assert d.psi == pytest.approx(math.log(2), abs=1e-14)
        assert abs(d.d2_beta1 - 0.25) < 1e-12
        assert abs(d.edge_prob - 0.5) < 1e-14
        assert abs(d.d_beta1 - 0.5) < 1e-14

    def test_finite_differences(self):
        rng = np.random.default_rng(5)
        n, h = 200, 1e-5
        for prm in random_params(rng, 20):
            b1, b2, p = prm.beta1, prm.beta2, prm.p

            def f(x, y):
                return psi_n(ModelParams(x, y, p), n)

            d = exact_derivatives(prm, n)
            f0 = f(b1, b2)
            fd1 = (f(b1 + h, b2) - f(b1 - h, b2)) / (2 * h)
            fd2 = (f(b1, b2 + h) - f(b1, b2 - h)) / (2 * h)
            np.testing.assert_allclose([fd1, fd2], [d.d_beta1, d.d_beta2], rtol=1e-6)
            h2 = 1e-3
            dd1 = (f(b1 + h2, b2) - 2 * f0 + f(b1 - h2, b2)) / h2**2
            dd2 = (f(b1, b2 + h2) - 2 * f0 + f(b1, b2 - h2)) / h2**2
            dm = (f(b1 + h2, b2 + h2) - f(b1 + h2, b2 - h2) - f(b1 - h2, b2 + h2)
                  + f(b1 - h2, b2 - h2)) / (4 * h2**2)
            np.testing.assert_allclose([dd1, dd2, dm], [d.d2_beta1, d.d2_beta2, d.d2_mixed],
                                       rtol=1e-4, atol=1e-8)

    @settings(max_examples=100, deadline=None)
    @given(b1=st.floats(-4, 4), b2=st.floats(-4, 6), p=st.integers(2, 4), n=st.integers(1, 3000))
    def test_moment_inequalities(self, b1, b2, p, n):
        d = exact_derivatives(ModelParams(b1, b2, p), n)
        assert d.d2_beta1 >= 0 and d.d2_beta2 >= 0
        assert d.d2_mixed**2 <= d.d2_beta1 * d.d2_beta2 * (1 + 1e-9) + 1e-300
        assert 0 <= d.d_beta1 <= 1 and 0 <= d.edge_prob <= 1
        assert 0 <= d.d_beta2 <= 1

    @settings(max_examples=50, deadline=None)
    @given(b=st.floats(-6, 6), n=st.integers(2, 20000))
    def test_p2_edge_symmetry(self, b, n):
        assert abs(edge_probability_exact(ModelParams(-b, b), n) - 0.5) < 1e-12

    def test_edge_prob_equals_mean_density(self):
        prm = ModelParams(-1.2, 2.7, 3)
        d = exact_derivatives(prm, 321)
        assert d.edge_prob == pytest.approx(d.d_beta1, rel=1e-14)

    def test_edge_prob_matches_limit(self):
        prm = ModelParams(-1.5, 1.5)
        assert abs(edge_probability_exact(prm, 10**5) - limiting_values(prm).edge_prob) < 1e-3

    def test_free_energy_rate_example(self):
        prm = ModelParams(-1.5, 1.5)
        n = 10**4
        assert abs(psi_n(prm, n) - find_maximizers(prm).ell_value) < 5 * math.log(n) / n


class TestSumVsIntegral:
    def test_trivial(self):
        assert abs(sum_vs_integral(ModelParams(0, 0), 10**3, 0).ratio - 1) < 1e-2

    def test_convergence(self):
        prm = ModelParams(-1.5, 1.5)
        r3 = abs(sum_vs_integral(prm, 10**3, 1).ratio - 1)
        r4 = abs(sum_vs_integral(prm, 10**4, 1).ratio - 1)
        assert r4 < r3

    def test_critical(self):
        prm = ModelParams(*critical_point(2), 2)
        assert abs(sum_vs_integral(prm, 10**4, 0).ratio - 1) < 5e-2

    @pytest.mark.parametrize("k", [0, 1, 2, 3, 4, 6])
    def test_all_orders_p3(self, k):
        res = sum_vs_integral(ModelParams(-0.5, 0.5, 3), 2000, k)
        assert abs(res.ratio - 1) < 1e-2

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            sum_vs_integral(ModelParams(0, 0), 5, 0)
        with pytest.raises(DomainError):
            sum_vs_integral(ModelParams(0, 0, 3), 100, 5)
