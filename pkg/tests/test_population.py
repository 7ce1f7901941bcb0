import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meritlab.population import (
    POPULATION_PRESETS,
    FactorSpec,
    LognormalMoments,
    PopulationSpec,
    lognormal_from_moments,
    sample_population,
    sample_shockley,
    shockley_productivity,
)


def lognormal_std_se(mean: float, std: float, n: int) -> float:
    """Monte Carlo standard error of the sample std of a lognormal.

    Independent oracle from analytic raw moments: Var(s^2) ~ (mu4 - sigma^4)/n
    and SE(s) ~ SE(s^2) / (2 sigma).
    """
    loc, scale = lognormal_from_moments(LognormalMoments(mean, std))
    raw = lambda k: math.exp(k * loc + k**2 * scale**2 / 2)
    m = raw(1)
    mu4 = raw(4) - 4 * raw(3) * m + 6 * raw(2) * m**2 - 3 * m**4
    var_s2 = (mu4 - std**4) / n
    return math.sqrt(var_s2) / (2 * std)


class TestMomentInversion:
    def test_zero_variance(self):
        loc, scale = lognormal_from_moments(LognormalMoments(1.0, 0.0))
        assert (loc, scale) == (0.0, 0.0)

    def test_mean2_std1_parameters(self):
        loc, scale = lognormal_from_moments(LognormalMoments(2.0, 1.0))
        assert scale**2 == pytest.approx(math.log(1.25))
        assert loc == pytest.approx(math.log(2) - math.log(1.25) / 2)

    def test_mean2_std1_sampling_round_trip(self):
        loc, scale = lognormal_from_moments(LognormalMoments(2.0, 1.0))
        draws = np.random.default_rng(7).lognormal(loc, scale, 10**6)
        assert draws.mean() == pytest.approx(2.0, rel=0.01)
        assert draws.std() == pytest.approx(1.0, rel=0.01)

    def test_non_positive_mean_rejected(self):
        with pytest.raises(ValueError):
            lognormal_from_moments(LognormalMoments(0.0, 0.0))
        with pytest.raises(ValueError):
            LognormalMoments(-1.0, 0.5)
        with pytest.raises(ValueError):
            LognormalMoments(0.0, 0.5)

    @given(st.floats(0.01, 50.0), st.floats(0.001, 1.5))
    @settings(max_examples=25, deadline=None)
    def test_moment_round_trip_within_3_se(self, mean, cv):
        std = mean * cv
        n = 10**5
        loc, scale = lognormal_from_moments(LognormalMoments(mean, std))
        draws = np.random.default_rng(12345).lognormal(loc, scale, n)
        assert abs(draws.mean() - mean) < 3 * (std / math.sqrt(n)) + 1e-9 * mean
        assert abs(draws.std(ddof=1) - std) < 3 * lognormal_std_se(mean, std, n) + 1e-9 * mean


class TestSamplePopulation:
    def test_homogeneous_spec(self):
        spec = PopulationSpec(LognormalMoments(0.1, 0.0), LognormalMoments(0.2, 0.0), 100)
        pop = sample_population(spec, 1)
        assert np.all(pop.mu == 0.1)
        assert np.all(pop.sigma == 0.2)

    def test_mean_within_mc_bound(self):
        spec = PopulationSpec(LognormalMoments(0.1, 0.05), LognormalMoments(0.2, 0.1), 10**5)
        pop = sample_population(spec, 42)
        assert abs(pop.mu.mean() - 0.1) < 0.002
        assert abs(pop.sigma.mean() - 0.2) < 0.004

    def test_determinism_bit_identical(self):
        spec = POPULATION_PRESETS["population-3"]
        a = sample_population(spec, 99)
        b = sample_population(spec, 99)
        assert np.array_equal(a.mu, b.mu) and np.array_equal(a.sigma, b.sigma)
        assert [repr(x) for x in a.mu[:50]] == [repr(x) for x in b.mu[:50]]

    def test_skill_luck_orthogonal(self):
        spec = PopulationSpec(LognormalMoments(0.1, 0.05), LognormalMoments(0.2, 0.1), 10**5)
        pop = sample_population(spec, 5)
        assert abs(np.corrcoef(pop.mu, pop.sigma)[0, 1]) < 0.01

    def test_sequence_protocol(self):
        pop = sample_population(POPULATION_PRESETS["population-1"], 3)
        assert len(pop) == 100_000
        agent = pop[17]
        assert agent.mu == pop.mu[17] and agent.sigma == pop.sigma[17]

    def test_invalid_count(self):
        with pytest.raises(ValueError):
            PopulationSpec(LognormalMoments(0.1, 0.0), LognormalMoments(0.1, 0.0), 0)


class TestShockley:
    def test_amplification_factor(self):
        ratio = shockley_productivity([1.5] * 10) / shockley_productivity([1.0] * 10)
        assert ratio == pytest.approx(57.665, abs=1e-3)

    def test_identity(self):
        assert shockley_productivity([1.0, 1.0, 1.0]) == 1.0

    def test_direct_product(self):
        assert shockley_productivity([2.0, 3.0]) == 6.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            shockley_productivity([])
        with pytest.raises(ValueError):
            shockley_productivity([1.0, 0.0])
        with pytest.raises(ValueError):
            shockley_productivity([1.0, -2.0])

    @given(
        st.lists(st.floats(0.1, 10.0), min_size=1, max_size=8),
        st.lists(st.floats(0.1, 10.0), min_size=8, max_size=8),
    )
    @settings(max_examples=60, deadline=None)
    def test_homogeneity(self, factors, boosts):
        boosts = boosts[: len(factors)]
        boosted = [f * b for f, b in zip(factors, boosts)]
        expected = shockley_productivity(factors) * shockley_productivity(boosts)
        assert shockley_productivity(boosted) == pytest.approx(expected, rel=1e-9)


class TestSampleShockley:
    def test_single_factor_matches_factor_distribution(self):
        spec = FactorSpec(1, LognormalMoments(2.0, 1.0))
        draws = sample_shockley(spec, 10**6, 11)
        assert draws.mean() == pytest.approx(2.0, rel=0.01)
        assert draws.std() == pytest.approx(1.0, rel=0.02)

    def test_log_std_scales_with_sqrt_factors(self):
        per = LognormalMoments(1.0, 0.5)
        _, scale = lognormal_from_moments(per)
        draws = sample_shockley(FactorSpec(10, per), 10**6, 13)
        assert np.log(draws).std() == pytest.approx(scale * math.sqrt(10), rel=0.02)

    def test_degenerate_factors(self):
        draws = sample_shockley(FactorSpec(4, LognormalMoments(1.1, 0.0)), 100, 17)
        assert np.all(draws == 1.1**4)

    def test_log_productivity_is_normal(self):
        # moment-based normality check: skewness and excess kurtosis of ln P
        from scipy.stats import kurtosis, skew

        n = 200_000
        draws = sample_shockley(FactorSpec(6, LognormalMoments(1.0, 0.6)), n, 19)
        logs = np.log(draws)
        assert abs(skew(logs)) < 4 * math.sqrt(6 / n)
        assert abs(kurtosis(logs)) < 4 * math.sqrt(24 / n)

    def test_validation(self):
        with pytest.raises(ValueError):
            FactorSpec(0, LognormalMoments(1.0, 0.1))
        with pytest.raises(ValueError):
            sample_shockley(FactorSpec(2, LognormalMoments(1.0, 0.1)), 0, 1)
