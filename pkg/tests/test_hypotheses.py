import numpy as np
import pytest

from exceptions import DomainError, InvalidDensityError
from utils.hypotheses import (
    Direction,
    HypothesisPairNormal,
    SpecialInterval,
    TestStatistic,
    binomial_statistic,
    check_monotone,
    normal_mean_statistic,
    one_sided_p_normal,
    orient,
    q_value,
    two_sided_p,
)
from utils.numeric import normal_cdf


class TestSpecialInterval:
    def test_centred(self):
        interval = SpecialInterval.centred(0.5, 0.03)
        assert interval.lo == pytest.approx(0.47)
        assert interval.hi == pytest.approx(0.53)
        assert interval.width == pytest.approx(0.06)
        assert interval.contains(0.5)
        assert not interval.contains(0.46)

    def test_sharp(self):
        assert SpecialInterval.centred(0.0, 0.0).is_sharp

    def test_rejects_reversed_and_negative_width(self):
        with pytest.raises(DomainError):
            SpecialInterval(1.0, 0.0)
        with pytest.raises(DomainError):
            SpecialInterval.centred(0.0, -0.1)
        with pytest.raises(DomainError):
            SpecialInterval(-np.inf, 0.0)


class TestOrient:
    def test_normal_difference_orients_upper(self):
        oriented = orient(normal_mean_statistic(2.7, 1.0), SpecialInterval.centred(0.0, 0.2))
        assert oriented.direction is Direction.UPPER
        assert oriented.p_value == pytest.approx(0.0062, abs=5e-5)
        assert oriented.boundary == pytest.approx(0.2)
        assert oriented.h_p(0.1)
        assert not oriented.h_p(0.3)

    def test_binomial_orients_lower(self):
        oriented = orient(binomial_statistic(1, 10), SpecialInterval.centred(0.5, 0.03))
        assert oriented.direction is Direction.LOWER
        assert oriented.p_value == pytest.approx(0.0173, abs=5e-5)
        assert oriented.h_s_tail == "left"
        assert "0.47" in oriented.describe()

    def test_ties_go_to_lower(self):
        oriented = orient(normal_mean_statistic(0.0, 1.0), SpecialInterval.centred(0.0, 0.5))
        assert oriented.direction is Direction.LOWER

    def test_negative_difference_mirrors(self):
        up = orient(normal_mean_statistic(1.3, 1.0), SpecialInterval.centred(0.0, 0.2))
        down = orient(normal_mean_statistic(-1.3, 1.0), SpecialInterval.centred(0.0, 0.2))
        assert up.direction is down.direction.mirrored()
        assert up.p_value == pytest.approx(down.p_value, abs=1e-14)

    def test_h_s_compares_tail_proportion_to_beta(self):
        stat = normal_mean_statistic(2.7, 1.0)
        oriented = orient(stat, SpecialInterval.centred(0.0, 0.2))
        assert oriented.h_s(stat.tail_proportion(0.2, Direction.UPPER))
        assert not oriented.h_s(stat.tail_proportion(1.0, Direction.UPPER))


class TestNormalPValues:
    def test_two_sided(self):
        assert two_sided_p(HypothesisPairNormal(1.959964, 1.0)) == pytest.approx(0.05, abs=1e-6)

    def test_q_value_reduces_to_two_sided_at_sharp_null(self):
        pair = HypothesisPairNormal(1.2, 0.8)
        assert q_value(pair) == pytest.approx(two_sided_p(pair))

    def test_one_sided(self):
        assert one_sided_p_normal(HypothesisPairNormal(2.7, 1.0, 0.2)) == pytest.approx(normal_cdf(-2.5))
        assert one_sided_p_normal(HypothesisPairNormal(-2.7, 1.0, 0.2)) == pytest.approx(normal_cdf(-2.5))

    def test_pair_validation(self):
        with pytest.raises(DomainError):
            HypothesisPairNormal(1.0, 0.0)
        with pytest.raises(DomainError):
            HypothesisPairNormal(1.0, 1.0, -0.1)


class TestMonotonicity:
    def test_normal_statistic(self):
        assert check_monotone(normal_mean_statistic(2.7, 1.0), np.linspace(-4.0, 8.0, 64))

    def test_binomial_statistic(self):
        assert check_monotone(binomial_statistic(1, 10), np.linspace(0.01, 0.99, 64))

    def test_increasing_cdf_is_rejected(self):
        bad = TestStatistic(
            value=0.0,
            cdf=lambda t, theta: normal_cdf(theta - t),
            comp_cdf=lambda t, theta: normal_cdf(t - theta),
        )
        with pytest.raises(InvalidDensityError):
            check_monotone(bad, np.linspace(-2.0, 2.0, 16))

    def test_non_complementary_tails_are_rejected(self):
        bad = TestStatistic(
            value=0.0,
            cdf=lambda t, theta: normal_cdf(t - theta),
            comp_cdf=lambda t, theta: 0.5 * normal_cdf(theta - t),
        )
        with pytest.raises(InvalidDensityError):
            check_monotone(bad, np.linspace(-2.0, 2.0, 16))
