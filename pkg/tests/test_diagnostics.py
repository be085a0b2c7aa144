import numpy as np
import pytest
from scipy import signal

from exceptions import SamplerError
from models.conditionals import compatible_conditionals, full_conditionals
from utils.diagnostics import (
    MarginalComparison,
    ScanCutoffs,
    autocorrelation_time,
    classify,
    fisher_z_test,
    gelman_rubin,
    scan_order_compare,
    thin_to_independent,
)
from utils.fiducial import normal_density
from utils.numeric import RngStream
from utils.pdo import PdoCurve
from utils.sampler import ChainOutput, ExactConditional, GibbsConfig, ScanOrder


def chain_of(values) -> ChainOutput:
    samples = np.asarray(values, dtype=float).reshape(-1, 1)
    return ChainOutput(samples, ("a",), acceptance_rates={}, scan=ScanOrder.random(), seed=RngStream(0))


def incompatible_pair():
    """x | y ~ N(y/2, 1) and y | x ~ N(x/2, 4) admit no common joint"""
    return [
        ExactConditional("x", lambda state: normal_density(0.5 * state["y"], 1.0)),
        ExactConditional("y", lambda state: normal_density(0.5 * state["x"], 2.0)),
    ]


class TestGelmanRubin:
    def test_identical_chains(self, rng):
        values = rng.standard_normal(500)
        assert gelman_rubin([chain_of(values), chain_of(values)]) == pytest.approx(1.0)

    def test_shifted_chains_are_flagged(self, rng):
        values = rng.standard_normal(500)
        assert gelman_rubin([chain_of(values), chain_of(values + 3.0)], "a") > 1.05

    def test_input_checks(self, rng):
        values = rng.standard_normal(50)
        with pytest.raises(SamplerError):
            gelman_rubin([chain_of(values)])
        with pytest.raises(SamplerError):
            gelman_rubin([chain_of(values), chain_of(values[:40])])
        with pytest.raises(SamplerError):
            gelman_rubin([chain_of(values), chain_of(values)], "b")
        with pytest.raises(SamplerError):
            gelman_rubin([chain_of(np.ones(50)), chain_of(np.ones(50))])


def ar1(rng, phi: float, n: int) -> np.ndarray:
    return signal.lfilter([1.0], [1.0, -phi], rng.standard_normal(n))


class TestAutocorrelation:
    def test_independent_draws(self, rng):
        assert autocorrelation_time(rng.standard_normal(20000)) == pytest.approx(1.0, abs=0.1)

    def test_ar1_time(self, rng):
        # (1 + phi) / (1 - phi)
        assert autocorrelation_time(ar1(rng, 0.9, 200000)) == pytest.approx(19.0, rel=0.15)

    def test_constant_series(self):
        assert autocorrelation_time(np.full(100, 2.0)) == 1.0

    def test_thinning_keeps_the_slowest_column_in_step(self, rng):
        samples = np.column_stack([rng.standard_normal(100000), ar1(rng, 0.9, 100000)])
        thinned, step = thin_to_independent(samples)
        assert 15 <= step <= 23
        assert thinned.shape == (len(range(0, 100000, step)), 2)
        lag_one = np.corrcoef(thinned[:-1, 1], thinned[1:, 1])[0, 1]
        assert abs(lag_one) < 0.2

    def test_short_chains_keep_sixteen_rows(self, rng):
        thinned, step = thin_to_independent(ar1(rng, 0.99, 64).reshape(-1, 1))
        assert step <= 4
        assert len(thinned) >= 16


class TestFisherZ:
    def test_equal_correlations(self):
        z, p = fisher_z_test(0.3, 100, 0.3, 100)
        assert z == pytest.approx(0.0)
        assert p == pytest.approx(1.0)

    def test_different_correlations(self):
        z, p = fisher_z_test(0.34, 5000, 0.73, 5000)
        assert z < 0
        assert p < 1e-6

    def test_needs_more_than_three_samples(self):
        with pytest.raises(SamplerError):
            fisher_z_test(0.1, 3, 0.2, 100)

    def test_undefined_correlation(self):
        z, p = fisher_z_test(float("nan"), 10, 0.2, 10)
        assert np.isnan(z) and np.isnan(p)


class TestClassify:
    @pytest.mark.parametrize(
        "distance, significant, expected",
        [
            (0.2, False, "undetectable"),
            (0.005, True, "negligible"),
            (0.03, True, "small"),
            (0.2, True, "substantial"),
        ],
    )
    def test_grades(self, distance, significant, expected):
        marginals = [MarginalComparison("a", distance, 0.0)]
        assert classify(marginals, significant, ScanCutoffs()) == expected


class TestScanOrderCompare:
    def test_needs_two_fixed_orders(self):
        config = GibbsConfig(n_samples=100, burn_in=0)
        with pytest.raises(SamplerError):
            scan_order_compare(incompatible_pair(), config, (ScanOrder.random(), ScanOrder.fixed([1, 0])), {"x": 0.0, "y": 0.0})

    def test_incompatible_pair_is_detected(self):
        config = GibbsConfig(n_samples=5000, burn_in=200, seed=RngStream(3))
        report = scan_order_compare(
            incompatible_pair(),
            config,
            (ScanOrder.fixed([0, 1]), ScanOrder.fixed([1, 0])),
            {"x": 0.0, "y": 0.0},
        )
        assert report.orders == ("fixed(x,y)", "fixed(y,x)")
        assert report.significant
        assert report.classification != "undetectable"
        (correlation,) = report.correlations
        # stationary correlations are about 0.34 and 0.73
        assert correlation.correlations[0] < correlation.correlations[1]
        assert correlation.p_value < 0.01
        assert report.as_dict()["correlations"][0]["parameters"] == ["x", "y"]

    def test_runs_are_pooled(self):
        config = GibbsConfig(n_samples=300, burn_in=50, seed=RngStream(3))
        report = scan_order_compare(
            incompatible_pair(),
            config,
            (ScanOrder.fixed([0, 1]), ScanOrder.fixed([1, 0])),
            {"x": 0.0, "y": 0.0},
            runs=3,
        )
        assert report.samples_per_order == 900
        assert len(report.thin_steps) == 6
        assert 16 <= report.effective_per_order <= report.samples_per_order
        assert report.as_dict()["effective_per_order"] == report.effective_per_order

    @pytest.mark.slow
    def test_compatible_pair_orders_agree(self, normal_unknown):
        config = GibbsConfig(n_samples=100000, burn_in=1000, seed=RngStream(9))
        report = scan_order_compare(
            compatible_conditionals(normal_unknown),
            config,
            (ScanOrder.fixed([0, 1]), ScanOrder.fixed([1, 0])),
            normal_unknown.initial_state(),
        )
        assert report.classification in ("undetectable", "negligible")

    @pytest.mark.slow
    def test_full_conditionals_agree_across_fixed_orders(self, normal_unknown):
        config = GibbsConfig(n_samples=20000, burn_in=500, seed=RngStream(13))
        report = scan_order_compare(
            full_conditionals(normal_unknown, PdoCurve.power(1.0, 0.6), memo=0.05),
            config,
            (ScanOrder.fixed([0, 1]), ScanOrder.fixed([1, 0])),
            normal_unknown.initial_state(),
        )
        assert max(report.thin_steps) > 1
        for marginal in report.marginals:
            assert marginal.p_value > 0.01
