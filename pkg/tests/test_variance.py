import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circrel import (
    CirculationPlan,
    EnumerationTooLarge,
    ExponentialLegModel,
    IndexOutOfRange,
    Leg,
    LegSamples,
    MomentSet,
    NegativeVariance,
    OmegaPair,
    OutOfRangeProbability,
    Scenario,
    ValidationError,
    conditional_mixed_moment,
    estimator_variance,
    h_factor,
    leg_kernels,
    mixed_moment_mu11,
    omega_probability,
    pair_probability,
    variance_pipeline,
)
from tests.conftest import reference_scenario, random_scenario, random_sizes

# Kernel values at rates (0.05, 0.02), t = 140, frozen from the quadrature
# route (relative error <= 1e-9).
H_BOTH = 0.8992578169350064
H_NEITHER = 0.8086646213187134
H_SERVICE_ONLY = 0.8745280042693555
H_DELAY_ONLY = 0.8133574245902094

REFERENCE_LEG = Leg(rates=ExponentialLegModel(0.05, 0.02))


class TestOmegaProbability:
    def test_forced_coincidence(self):
        assert omega_probability({0, 1, 2}, [1, 1, 1]) == 1.0

    def test_forced_coincidence_complement(self):
        assert omega_probability(set(), [1, 1, 1]) == 0.0

    def test_three_leg_pattern(self):
        p = omega_probability({0, 2}, [20, 20, 20])
        assert p == pytest.approx(0.002375, abs=1e-15)

    def test_matches_collision_frequency(self):
        rng = np.random.default_rng(5)
        trials = 400_000
        draws = rng.integers(0, 20, size=(trials, 2, 3))
        same = draws[:, 0, :] == draws[:, 1, :]
        freq = np.mean(same[:, 0] & ~same[:, 1] & same[:, 2])
        se = math.sqrt(0.002375 * (1 - 0.002375) / trials)
        assert abs(freq - 0.002375) < 4 * se

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            omega_probability({3}, [5, 5, 5])

    def test_completeness(self):
        sizes = [3, 7, 2, 9]
        total = sum(
            omega_probability({i for i in range(4) if mask >> i & 1}, sizes)
            for mask in range(16)
        )
        assert total == pytest.approx(1.0, abs=1e-14)


class TestPairProbability:
    def test_forced(self):
        pair = OmegaPair(frozenset({0, 1}), frozenset({0, 1}))
        assert pair_probability(pair, [1, 1], [1, 1]) == 1.0

    def test_impossible_pattern(self):
        pair = OmegaPair(frozenset(), frozenset({0}))
        assert pair_probability(pair, [1], [4]) == 0.0

    def test_one_leg_split(self):
        pair = OmegaPair(frozenset({0}), frozenset())
        assert pair_probability(pair, [20], [20]) == pytest.approx(0.0475, abs=1e-15)


class TestKernels:
    def test_all_cases_vanish_at_zero_slack(self):
        for in1 in (False, True):
            for in2 in (False, True):
                assert h_factor(in1, in2, REFERENCE_LEG, 0.0, "closed_form") == 0.0

    def test_reference_point_closed_form(self):
        kernels = leg_kernels(REFERENCE_LEG, 140.0, "closed_form")
        assert kernels.both.value == pytest.approx(H_BOTH, abs=1e-12)
        assert kernels.neither.value == pytest.approx(H_NEITHER, abs=1e-12)
        assert kernels.service_only.value == pytest.approx(H_SERVICE_ONLY, abs=1e-12)
        assert kernels.delay_only.value == pytest.approx(H_DELAY_ONLY, abs=1e-12)

    def test_reference_point_quadrature_agrees(self):
        closed = leg_kernels(REFERENCE_LEG, 140.0, "closed_form")
        quad = leg_kernels(REFERENCE_LEG, 140.0, "quadrature")
        for case in ("both", "neither", "service_only", "delay_only"):
            assert getattr(closed, case).value == pytest.approx(
                getattr(quad, case).value, abs=1e-8
            )

    def test_plugin_kernels_hand_computed(self):
        leg = Leg(samples=LegSamples((1.0, 3.0), (1.0, 3.0)))
        kernels = leg_kernels(leg, 4.0, "plugin")
        assert kernels.both.value == 0.75
        assert kernels.neither.value == 0.5625
        assert kernels.service_only.value == pytest.approx(0.625, abs=1e-15)
        assert kernels.delay_only.value == pytest.approx(0.625, abs=1e-15)

    def test_near_singular_flags(self):
        equal = leg_kernels(Leg(rates=ExponentialLegModel(0.05, 0.05)), 40.0, "closed_form")
        assert equal.both.method == "erlang_limit" and equal.both.near_singular
        assert equal.service_only.method == "quadrature" and equal.service_only.near_singular
        double = leg_kernels(Leg(rates=ExponentialLegModel(0.05, 0.1)), 40.0, "closed_form")
        assert double.service_only.near_singular
        assert not double.delay_only.near_singular
        assert not double.both.near_singular

    def test_mode_requirements(self):
        with pytest.raises(ValidationError):
            leg_kernels(REFERENCE_LEG, 10.0, "plugin")
        with pytest.raises(ValidationError):
            leg_kernels(Leg(samples=LegSamples((1.0,), (1.0,))), 10.0, "closed_form")

    @given(st.floats(0.005, 0.5), st.floats(0.005, 0.5), st.floats(0.0, 400.0))
    @settings(max_examples=120)
    def test_ordering_invariant(self, a, b, t):
        kernels = leg_kernels(Leg(rates=ExponentialLegModel(a, b)), t, "closed_form")
        r = kernels.both.value
        for middle in (kernels.service_only.value, kernels.delay_only.value):
            assert kernels.neither.value <= middle + 1e-10
            assert middle <= r + 1e-10


class TestConditionalMixedMoment:
    def test_full_coincidence_is_theta(self):
        scenario = reference_scenario(140.0, k=3)
        pair = OmegaPair(frozenset({0, 1, 2}), frozenset({0, 1, 2}))
        value = conditional_mixed_moment(pair, scenario, mode="closed_form")
        assert value == pytest.approx(H_BOTH**3, rel=1e-12)

    def test_no_coincidence_is_theta_squared(self):
        scenario = reference_scenario(140.0, k=3)
        pair = OmegaPair(frozenset(), frozenset())
        value = conditional_mixed_moment(pair, scenario, mode="closed_form")
        assert value == pytest.approx((H_BOTH**3) ** 2, rel=1e-10)

    def test_mixed_pair_is_product(self):
        scenario = reference_scenario(140.0, k=2)
        pair = OmegaPair(frozenset({0}), frozenset({1}))
        value = conditional_mixed_moment(pair, scenario, mode="closed_form")
        assert value == pytest.approx(H_DELAY_ONLY * H_SERVICE_ONLY, rel=1e-12)


class TestMixedMoment:
    def test_singleton_samples_force_theta(self):
        scenario = reference_scenario(140.0, k=4)
        mu11 = mixed_moment_mu11(scenario, [1] * 4, [1] * 4, mode="closed_form")
        assert mu11 == pytest.approx(H_BOTH**4, rel=1e-12)

    def test_reference_configuration(self):
        mu11 = mixed_moment_mu11(
            reference_scenario(140.0), [20] * 5, [20] * 5, mode="closed_form"
        )
        assert mu11 == pytest.approx(0.3535319033097205, rel=1e-10)
        assert mu11 == pytest.approx(0.353525, abs=2e-5)

    def test_methods_agree_on_mixed_scenario(self, rng):
        for _ in range(10):
            scenario = random_scenario(rng)
            sizes_x, sizes_y = random_sizes(rng, scenario.plan.k)
            factorized = mixed_moment_mu11(scenario, sizes_x, sizes_y)
            enumerated = mixed_moment_mu11(scenario, sizes_x, sizes_y, method="enumerate")
            assert abs(factorized - enumerated) < 1e-12

    def test_enumeration_guard(self):
        scenario = reference_scenario(100.0, k=13)
        with pytest.raises(EnumerationTooLarge):
            mixed_moment_mu11(scenario, [2] * 13, [2] * 13, method="enumerate")


class TestEstimatorVariance:
    def test_single_realization_is_bernoulli(self):
        report = estimator_variance(0.5, 0.9, r=1)
        assert report.variance == 0.25

    def test_independence_limit(self):
        theta = 0.37
        report = estimator_variance(theta, theta * theta, r=25)
        assert report.variance == pytest.approx(theta * (1 - theta) / 25, rel=1e-12)

    def test_reference_row(self):
        report = estimator_variance(0.5880592807374714, 0.3535319033097205, r=50)
        assert report.variance == pytest.approx(0.0124, abs=1e-4)

    def test_formula_invariant(self):
        theta, mu11, r = 0.6, 0.4, 7
        report = estimator_variance(theta, mu11, r)
        assert report.variance == pytest.approx(
            theta / r + (r - 1) / r * mu11 - theta * theta, abs=1e-15
        )
        assert report.mu2 == theta

    def test_rounding_clamp_and_error(self):
        # mu11 slightly below theta**2 at huge r: formula dips a hair negative.
        assert estimator_variance(0.5, 0.25 - 3.5e-13, r=10**12).variance == 0.0
        with pytest.raises(NegativeVariance):
            estimator_variance(0.9, 0.1, r=1000)

    def test_input_validation(self):
        with pytest.raises(OutOfRangeProbability):
            estimator_variance(1.2, 0.5, r=10)
        with pytest.raises(OutOfRangeProbability):
            estimator_variance(0.5, -0.1, r=10)
        with pytest.raises(ValidationError):
            estimator_variance(0.5, 0.4, r=0)


class TestVariancePipeline:
    def test_reference_endpoints(self):
        low = variance_pipeline(
            reference_scenario(20.0), r=50, mode="closed_form",
            sizes_x=[20] * 5, sizes_y=[20] * 5,
        )
        high = variance_pipeline(
            reference_scenario(300.0), r=50, mode="closed_form",
            sizes_x=[20] * 5, sizes_y=[20] * 5,
        )
        assert low.variance == pytest.approx(6.9e-7, abs=1e-8)
        assert high.variance == pytest.approx(0.0011, abs=1e-4)

    def test_moments_ordered(self):
        report = variance_pipeline(
            reference_scenario(140.0), r=50, mode="closed_form",
            sizes_x=[20] * 5, sizes_y=[20] * 5,
        )
        assert report.theta**2 - 1e-12 <= report.mu11 <= report.theta + 1e-12
        assert report.variance >= 0.0
        assert len(report.per_leg_h) == 5

    def test_variance_vanishes_with_big_samples_and_many_realizations(self):
        scenario = reference_scenario(140.0, k=2)
        by_n = [
            variance_pipeline(
                scenario, r=50, mode="closed_form", sizes_x=[n] * 2, sizes_y=[n] * 2
            ).variance
            for n in (2, 20, 200, 2000, 10**6)
        ]
        assert all(b < a for a, b in zip(by_n, by_n[1:]))
        by_r = [
            variance_pipeline(
                scenario, r=r, mode="closed_form", sizes_x=[10**6] * 2, sizes_y=[10**6] * 2
            ).variance
            for r in (1, 10, 100, 10**4, 10**6)
        ]
        assert all(b < a for a, b in zip(by_r, by_r[1:]))
        # Only the joint limit kills both noise sources.
        assert by_r[-1] < 1e-6

    def test_plugin_mode_derives_sizes(self):
        scenario = Scenario(
            plan=CirculationPlan((4.0, 6.0)),
            legs=(
                Leg(samples=LegSamples((1.0, 3.0), (1.0, 3.0))),
                Leg(samples=LegSamples((2.0, 5.0, 1.0), (0.5, 2.5))),
            ),
        )
        report = variance_pipeline(scenario, r=3, mode="plugin")
        assert report.kernel_mode == "plugin"
        assert 0.0 <= report.variance <= 0.25

    def test_sizes_required_for_exponential_legs(self):
        with pytest.raises(ValidationError):
            variance_pipeline(reference_scenario(140.0), r=50, mode="closed_form")


def test_moment_set_carries_theta_twice():
    moments = MomentSet.from_theta(0.7, 0.52)
    assert moments.mu == moments.mu2 == 0.7
    assert moments.mu11 == 0.52
