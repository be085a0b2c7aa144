import numpy as np
import pytest
from scipy import stats

from exceptions import DomainError, QuadratureError, RootBracketError
from utils.numeric import (
    GridDensity,
    RngStream,
    beta_pdf,
    binom_lower_tail,
    binom_pmf,
    binom_upper_tail,
    find_root,
    integrate,
    integrate_fixed,
    normal_cdf,
    normal_pdf,
    normal_ppf,
    scaled_inv_chi2,
)


class TestSpecialFunctions:
    def test_normal_basics(self):
        assert normal_cdf(0.0) == pytest.approx(0.5)
        assert normal_ppf(0.975) == pytest.approx(1.959964, abs=1e-6)
        assert normal_pdf(0.0) == pytest.approx(1.0 / np.sqrt(2.0 * np.pi))
        assert normal_cdf(-2.5) == pytest.approx(0.0062097, abs=1e-7)

    def test_binomial_lower_tail_golden(self):
        assert binom_lower_tail(1, 10, 0.47) == pytest.approx(0.0173, abs=5e-5)

    def test_binomial_tails_are_inclusive(self):
        k, n, p = 3, 12, 0.4
        total = binom_lower_tail(k, n, p) + binom_upper_tail(k, n, p) - binom_pmf(k, n, p)
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_binomial_saturated_tails(self):
        assert binom_lower_tail(10, 10, 0.3) == 1.0
        assert binom_upper_tail(0, 10, 0.3) == 1.0

    def test_binomial_rejects_bad_arguments(self):
        with pytest.raises(DomainError):
            binom_lower_tail(11, 10, 0.5)
        with pytest.raises(DomainError):
            binom_upper_tail(1, 10, 1.5)

    def test_beta_pdf(self):
        assert beta_pdf(0.5, 2.0, 2.0) == pytest.approx(1.5)
        xs = np.array([0.1, 0.4, 0.9])
        np.testing.assert_allclose(beta_pdf(xs, 1.5, 9.5), stats.beta.pdf(xs, 1.5, 9.5), rtol=1e-10)
        with pytest.raises(DomainError):
            beta_pdf(1.0, 2.0, 2.0)
        with pytest.raises(DomainError):
            beta_pdf(0.5, 0.0, 2.0)

    def test_scaled_inv_chi2_matches_inverse_gamma(self):
        df, s = 8.0, 9.0
        reference = stats.invgamma(a=df / 2.0, scale=df * s / 2.0)
        xs = np.array([3.0, 9.0, 20.0])
        np.testing.assert_allclose(scaled_inv_chi2("pdf", s, df, at=xs), reference.pdf(xs), rtol=1e-10)
        np.testing.assert_allclose(scaled_inv_chi2("cdf", s, df, at=xs), reference.cdf(xs), rtol=1e-10)

    def test_scaled_inv_chi2_sampling(self, rng):
        draws = scaled_inv_chi2("sample", 9.0, 8.0, rng=rng, size=20000)
        assert draws.shape == (20000,)
        assert np.all(draws > 0)
        with pytest.raises(DomainError):
            scaled_inv_chi2("sample", 9.0, 8.0)
        with pytest.raises(DomainError):
            scaled_inv_chi2("pdf", 9.0, -1.0, at=1.0)


class TestQuadrature:
    def test_integrates_normal_density_over_real_line(self):
        assert integrate(normal_pdf, -np.inf, np.inf) == pytest.approx(1.0, abs=1e-9)

    def test_empty_and_reversed_ranges(self):
        assert integrate(normal_pdf, 1.0, 1.0) == 0.0
        with pytest.raises(DomainError):
            integrate(normal_pdf, 2.0, 1.0)

    def test_reports_non_convergence(self):
        # oscillates too fast for a handful of subintervals
        with pytest.raises(QuadratureError) as info:
            integrate(lambda x: np.sin(1.0 / x) / x, 1e-6, 1.0, tol=1e-14, limit=5)
        assert info.value.operation == "integrate"
        assert np.isfinite(info.value.best_estimate)

    def test_fixed_rule(self):
        assert integrate_fixed(lambda x: x**2, 0.0, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-14)
        assert integrate_fixed(np.cos, 0.3, 0.3) == 0.0


class TestRootFinding:
    def test_finds_bracketed_root(self):
        assert find_root(lambda x: x * x - 2.0, 0.0, 2.0) == pytest.approx(np.sqrt(2.0), abs=1e-11)

    def test_endpoint_roots(self):
        assert find_root(lambda x: x, 0.0, 1.0) == 0.0

    def test_missing_sign_change(self):
        with pytest.raises(RootBracketError) as info:
            find_root(lambda x: x * x + 1.0, -1.0, 1.0)
        assert info.value.operation == "find_root"


class TestRngStream:
    def test_same_seed_and_stream_repeat(self):
        a = RngStream(42, 3).generator().random(5)
        b = RngStream(42, 3).generator().random(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = RngStream(42, 0).generator().random(5)
        b = RngStream(42).spawn(1).generator().random(5)
        assert not np.array_equal(a, b)


class TestGridDensity:
    def test_mass_and_atoms(self):
        xs = np.linspace(-8.0, 8.0, 2001)
        grid = GridDensity(xs, 0.5 * normal_pdf(xs), atoms={0.0: 0.5})
        assert grid.mass() == pytest.approx(0.5, abs=1e-6)
        assert grid.total_mass() == pytest.approx(1.0, abs=1e-6)

    def test_rejects_unordered_points(self):
        with pytest.raises(DomainError):
            GridDensity([0.0, 2.0, 1.0], [1.0, 1.0, 1.0])

    def test_rejects_negative_values(self):
        with pytest.raises(DomainError):
            GridDensity([0.0, 1.0], [1.0, -0.1])
