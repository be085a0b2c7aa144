"""Seeded randomized checks of the identities the engine relies on"""

import numpy as np
import pytest
from scipy import stats

from exceptions import AlphaBelowFloorError
from models.binomial import BinomialModel
from models.conditionals import compatible_conditionals, full_conditionals
from models.normal import NormalKnownVarModel
from models.relative_risk import Arm, rr_one_sided_p
from models.spike_slab import bayes_spike_slab
from utils.diagnostics import autocorrelation_time, gelman_rubin
from utils.fiducial import (
    GpdNeutral,
    IntervalShape,
    LpdUniform,
    condition_outside,
    lambda_ratio,
    normal_density,
    p_f_event_normal,
    reweight_by_lpd,
)
from utils.hypotheses import (
    Direction,
    HypothesisPairNormal,
    SpecialInterval,
    binomial_statistic,
    normal_mean_statistic,
    orient,
    q_value,
    two_sided_p,
)
from utils.numeric import RngStream, binom_lower_tail, binom_pmf, binom_upper_tail, integrate
from utils.pdo import PdoCurve, eval_curve
from utils.postdata import calibrate_tau, interval_mass
from utils.sampler import DensityConditional, GibbsConfig, ScanOrder, gibbs_run

SEED = 20240311
CASES = 200


def random_model(case: int):
    """Normal or binomial model with a random interval; even cases are normal"""
    rng = np.random.default_rng([SEED, case])
    if case % 2 == 0:
        return NormalKnownVarModel(
            mean=rng.uniform(-4.0, 4.0),
            sigma=rng.uniform(0.5, 2.0),
            epsilon=rng.uniform(0.02, 0.3),
            centre=rng.uniform(-0.5, 0.5),
        )
    trials = int(rng.integers(8, 31))
    return BinomialModel(
        successes=int(rng.integers(0, trials + 1)),
        trials=trials,
        epsilon=rng.uniform(0.01, 0.05),
        centre=rng.uniform(0.3, 0.7),
    )


def random_alpha(case: int, floor: float) -> float:
    rng = np.random.default_rng([SEED, case, 1])
    return floor + (1.0 - floor) * rng.uniform(0.02, 0.9)


class TestAssemblyIdentities:
    @pytest.mark.parametrize("case", range(CASES))
    def test_masses_and_continuity(self, case):
        model = random_model(case)
        alpha = random_alpha(case, model.floor())
        p = model.assemble(alpha)

        assert p.mass_below + p.mass_inside + p.mass_above == pytest.approx(1.0, abs=1e-9)
        lam = lambda_ratio(model.fiducial(), model.interval(), p.direction)
        assert p.mass_inside == interval_mass(alpha, lam)
        near, far = (p.mass_below, p.mass_above) if p.direction is Direction.LOWER else (p.mass_above, p.mass_below)
        assert near == 1.0 - alpha
        assert far == lam * (1.0 - alpha)

        assert p.calibration.tau >= 0.0
        edges = p.boundary_values()
        assert edges["inside_lo"] == pytest.approx(edges["below"], rel=1e-6)
        assert edges["inside_hi"] == pytest.approx(edges["above"], rel=1e-6)

    @pytest.mark.parametrize("case", range(CASES))
    def test_alpha_below_floor_has_no_calibration(self, case):
        model = random_model(case)
        f_s, oriented = model.fiducial(), model.orient()
        floor = model.floor()
        alpha = floor * np.random.default_rng([SEED, case, 2]).uniform(0.1, 0.95)
        with pytest.raises(AlphaBelowFloorError):
            calibrate_tau(alpha, f_s, oriented, model.interval(), IntervalShape())

    @pytest.mark.parametrize("case", range(CASES))
    def test_lambda_reciprocity(self, case):
        model = random_model(case)
        f_s, interval = model.fiducial(), model.interval()
        product = lambda_ratio(f_s, interval, Direction.LOWER) * lambda_ratio(f_s, interval, Direction.UPPER)
        assert product == pytest.approx(1.0, abs=1e-12)


class TestWeightLevels:
    @pytest.mark.parametrize("level", [0.1, 1.0, 10.0])
    def test_gpd_level_cancels(self, level):
        f_s = normal_density(1.3, 0.8)
        interval = SpecialInterval.centred(0.0, 0.2)
        reference = condition_outside(f_s, interval)
        scaled = condition_outside(f_s, interval, GpdNeutral(interval, level=level))
        xs = np.array([-2.0, -0.5, 0.0, 0.5, 3.0])
        np.testing.assert_allclose(scaled.pdf(xs), reference.pdf(xs), rtol=1e-12)

    @pytest.mark.parametrize("level", [0.1, 1.0, 10.0])
    def test_lpd_level_cancels(self, level):
        f_s = normal_density(-0.4, 2.0)
        xs = np.linspace(-6.0, 6.0, 13)
        np.testing.assert_allclose(reweight_by_lpd(f_s, LpdUniform(level)).pdf(xs), f_s.pdf(xs), rtol=1e-12)


class TestFiducialEventProbability:
    @pytest.mark.slow
    def test_half_for_random_data(self):
        rng = np.random.default_rng(SEED)
        for x, sigma in zip(rng.uniform(-20.0, 20.0, 20), rng.uniform(0.2, 5.0, 20)):
            assert p_f_event_normal(x, sigma, tol=1e-8) == pytest.approx(0.5, abs=1e-6)


class TestHypothesisProperties:
    def test_h_p_iff_h_s_normal(self):
        rng = np.random.default_rng(SEED)
        for _ in range(20):
            stat = normal_mean_statistic(rng.uniform(-3.0, 3.0), rng.uniform(0.3, 2.0))
            oriented = orient(stat, SpecialInterval.centred(rng.uniform(-0.5, 0.5), rng.uniform(0.0, 0.4)))
            for theta in rng.uniform(-6.0, 6.0, 50):
                if abs(theta - oriented.boundary) < 1e-6:
                    continue
                tail = stat.tail_proportion(theta, oriented.direction)
                assert oriented.h_p(theta) == oriented.h_s(tail)

    def test_h_p_iff_h_s_binomial(self):
        rng = np.random.default_rng(SEED + 1)
        for _ in range(20):
            trials = int(rng.integers(5, 40))
            stat = binomial_statistic(int(rng.integers(0, trials + 1)), trials)
            oriented = orient(stat, SpecialInterval.centred(rng.uniform(0.3, 0.7), rng.uniform(0.01, 0.05)))
            for theta in rng.uniform(0.01, 0.99, 50):
                if abs(theta - oriented.boundary) < 1e-6:
                    continue
                tail = stat.tail_proportion(theta, oriented.direction)
                assert oriented.h_p(theta) == oriented.h_s(tail)

    def test_orient_matches_one_sided_p_values(self):
        rng = np.random.default_rng(SEED + 2)
        for case in range(100):
            if case % 2 == 0:
                t, se = rng.uniform(-3.0, 3.0), rng.uniform(0.3, 2.0)
                interval = SpecialInterval.centred(rng.uniform(-0.5, 0.5), rng.uniform(0.0, 0.4))
                stat = normal_mean_statistic(t, se)
                lower = stats.norm.cdf(t, loc=interval.lo, scale=se)
                upper = stats.norm.sf(t, loc=interval.hi, scale=se)
            else:
                trials = int(rng.integers(5, 40))
                k = int(rng.integers(0, trials + 1))
                interval = SpecialInterval.centred(rng.uniform(0.3, 0.7), rng.uniform(0.01, 0.05))
                stat = binomial_statistic(k, trials)
                lower = stats.binom.cdf(k, trials, interval.lo)
                upper = stats.binom.sf(k - 1, trials, interval.hi)
            oriented = orient(stat, interval)
            assert oriented.direction is (Direction.LOWER if lower <= upper else Direction.UPPER)
            assert oriented.p_value == pytest.approx(min(lower, upper), rel=1e-9, abs=1e-300)

    def test_q_value_bounds_and_monotonicity(self):
        rng = np.random.default_rng(SEED + 3)
        epsilons = np.linspace(0.0, 2.0, 21)
        for x, sigma in zip(rng.uniform(-4.0, 4.0, 50), rng.uniform(0.2, 3.0, 50)):
            qs = np.array([q_value(HypothesisPairNormal(x, sigma, eps)) for eps in epsilons])
            assert np.all(qs >= two_sided_p(HypothesisPairNormal(x, sigma)) - 1e-15)
            assert np.all(np.diff(qs) >= -1e-15)

    def test_binomial_tails_are_complementary(self):
        rng = np.random.default_rng(SEED + 4)
        for _ in range(200):
            n = int(rng.integers(1, 60))
            k = int(rng.integers(0, n + 1))
            p = rng.uniform(0.0, 1.0)
            both = binom_lower_tail(k, n, p) + binom_upper_tail(k, n, p)
            assert both - binom_pmf(k, n, p) == pytest.approx(1.0, abs=1e-12)
            if k < n:
                assert binom_lower_tail(k, n, p) + binom_upper_tail(k + 1, n, p) == pytest.approx(1.0, abs=1e-12)


class TestSpikeSlabLimit:
    def test_diffuse_slab_drives_the_null_to_one(self):
        rng = np.random.default_rng(SEED + 5)
        widths = np.logspace(2, 9, 15)
        for x, sigma, mass in zip(rng.uniform(-2.0, 2.0, 20), rng.uniform(0.5, 2.0, 20), rng.uniform(0.1, 0.9, 20)):
            posterior = np.array([bayes_spike_slab(x, sigma, w, mass) for w in widths])
            assert np.all(np.diff(posterior) > 0)
            assert posterior[-1] > 0.999


class TestFloorCollapse:
    def test_mean_conditional_at_the_floor_is_the_fiducial(self, normal_unknown):
        sigma = 3.0
        floor = normal_unknown.mean_model(sigma).floor()
        mu, _ = full_conditionals(normal_unknown, floor)
        target = mu.target({"mu": 2.7, "sigma": sigma})
        f_s = normal_unknown.mean_fiducial(sigma)
        for theta in np.concatenate([np.linspace(0.25, 7.0, 28), np.linspace(-3.0, -0.25, 12)]):
            assert target(theta) == pytest.approx(float(f_s.pdf(theta)), rel=1e-6)


class TestRelativeRiskConditional:
    def test_treatment_conditional_normalises_and_matches_interval_mass(self, relative_risk):
        curve = PdoCurve.power(0.92, 0.6, beta_max=1.0)
        pi_t, _ = full_conditionals(relative_risk, curve)
        p = pi_t.build({"pi_t": 0.3, "pi_c": 0.6})
        lo, hi = p.interval.lo, p.interval.hi

        total = integrate(lambda th: float(p.pdf(th)), 0.0, 1.0, tol=1e-9, points=(lo, hi))
        assert total == pytest.approx(1.0, abs=1e-6)
        inside = integrate(lambda th: float(p.pdf(th)), lo, hi, tol=1e-10)
        assert inside == pytest.approx(p.mass_inside, abs=1e-6)

        f_s = relative_risk.fiducial(Arm.TREATMENT)
        below = integrate(lambda th: float(f_s.pdf(th)), 0.0, lo, tol=1e-12)
        above = integrate(lambda th: float(f_s.pdf(th)), hi, 1.0, tol=1e-12)
        oriented = rr_one_sided_p(relative_risk, 0.6, Arm.TREATMENT)
        lam = above / below if oriented.direction is Direction.LOWER else below / above
        alpha = eval_curve(curve, oriented.p_value)
        assert p.mass_inside == pytest.approx(alpha - lam * (1.0 - alpha), rel=1e-8)


@pytest.mark.slow
class TestSamplerScale:
    def test_metropolis_standard_normal_moments(self):
        target = DensityConditional("x", lambda state: lambda theta: np.exp(-0.5 * theta * theta), initial_scale=2.4)
        config = GibbsConfig(n_samples=200000, burn_in=1000, seed=RngStream(21), tune=False)
        x = gibbs_run([target], config, ScanOrder.fixed([0]), {"x": 0.0}).column("x")
        n = x.size
        mean_se = np.sqrt(autocorrelation_time(x) / n)
        var_se = np.sqrt(2.0 * autocorrelation_time(x * x) / n)
        assert abs(np.mean(x)) < 3.0 * mean_se
        assert abs(np.var(x) - 1.0) < 3.0 * var_se

    def test_dispersed_compatible_chains_converge(self, normal_unknown):
        starts = [{"mu": -20.0, "sigma": 0.5}, {"mu": 2.7, "sigma": 3.0}, {"mu": 25.0, "sigma": 30.0}, {"mu": 10.0, "sigma": 10.0}]
        chains = [
            gibbs_run(
                compatible_conditionals(normal_unknown),
                GibbsConfig(n_samples=5000, burn_in=500, seed=RngStream(22, stream)),
                ScanOrder.fixed([0, 1]),
                start,
            )
            for stream, start in enumerate(starts)
        ]
        assert gelman_rubin(chains, "mu") < 1.05
        assert gelman_rubin(chains, "sigma") < 1.05

    def test_bispatial_mean_accumulates_interval_mass(self, normal_unknown):
        conditionals = full_conditionals(normal_unknown, PdoCurve.power(1.0, 0.6), memo=0.05)
        config = GibbsConfig(n_samples=40000, burn_in=1000, seed=RngStream(23))
        mu = gibbs_run(conditionals, config, ScanOrder.random(), normal_unknown.initial_state()).column("mu")
        sampled = np.mean((mu >= -0.2) & (mu <= 0.2))
        # f_S(mu | sigma = s) mass on the interval
        baseline = normal_unknown.mean_fiducial(3.0).mass(-0.2, 0.2)
        assert baseline == pytest.approx(stats.norm.cdf(-2.5) - stats.norm.cdf(-2.9), rel=1e-9)
        assert sampled > 5.0 * baseline
