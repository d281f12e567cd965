import math

import numpy as np
import pytest

from infocoupling import (
    BlockCodeConfig,
    Distribution,
    greedy_layer,
    instances,
    plan_ternary_two_layer,
    simulate_layered,
    single_layer_plan,
)
from infocoupling.errors import (
    ConfigurationError,
    DegenerateLayerError,
    RegimeError,
)

ETA, GAMMA = 0.2, 0.1


@pytest.fixture
def channel():
    return instances.nested_ternary_channel(ETA, GAMMA)


@pytest.fixture
def plan():
    return plan_ternary_two_layer(ETA, GAMMA)


class TestGreedyLayer:
    def test_full_support_direction(self, channel):
        layer = greedy_layer(channel, instances.nested_ternary_operating_point(), 1.0)
        assert np.max(np.abs(layer.direction - [0.5, -0.25, -0.25])) <= 1e-9
        assert layer.sigma == pytest.approx(2 * ETA, abs=1e-12)

    def test_reduced_support_sigma(self, channel):
        layer = greedy_layer(channel, Distribution([0.0, 0.5, 0.5]), 1.0, support=(1, 2))
        assert layer.sigma == pytest.approx(math.sqrt(2 + 4 * ETA) * GAMMA, abs=1e-12)
        assert np.max(np.abs(layer.direction - [0.0, 0.5, -0.5])) <= 1e-12

    def test_binary_symmetric_restriction(self):
        # symmetric 2x2 restriction: direction proportional to (1/2, -1/2)
        w = instances.bsc(0.2)
        layer = greedy_layer(w, Distribution([0.5, 0.5]), 1.0)
        assert np.max(np.abs(layer.direction - [0.5, -0.5])) <= 1e-12

    def test_support_too_small(self, channel):
        with pytest.raises(DegenerateLayerError):
            greedy_layer(channel, Distribution([0.0, 1.0, 0.0]), 1.0, support=(1,))

    def test_mass_outside_support_rejected(self, channel):
        with pytest.raises(DegenerateLayerError):
            greedy_layer(
                channel, instances.nested_ternary_operating_point(), 1.0, support=(1, 2)
            )


class TestTernaryPlan:
    def test_total_rate_formula(self):
        plan = plan_ternary_two_layer(0.05, 0.02)
        formula = 2 * 0.05**2 + (0.5 + 0.05) * 0.02**2
        assert abs(plan.total_rate - formula) <= 1e-12
        assert plan.total_rate == pytest.approx(0.00522, abs=1e-12)

    def test_layer_rates(self, plan):
        assert plan.layers[0].rate == pytest.approx(2 * ETA**2, abs=1e-12)
        assert abs(plan.layers[0].rate - 0.5 * plan.layers[0].sigma**2) <= 1e-12
        assert abs(plan.layers[1].rate - 0.5 * plan.layers[1].sigma**2) <= 1e-12

    def test_vanishing_parameters(self):
        plan = plan_ternary_two_layer(1e-4, 0.5e-4)
        assert plan.total_rate <= 1e-7

    def test_replay_reaches_stated_boundary_points(self, plan):
        layer1 = plan.layers[0]
        plus = layer1.conditional(0)
        minus = layer1.conditional(1)
        assert np.max(np.abs(plus.probs - [1.0, 0.0, 0.0])) <= 1e-12
        assert np.max(np.abs(minus.probs - [0.0, 0.5, 0.5])) <= 1e-12
        assert plan.replay_residual() <= 1e-12
        layer2 = plan.layers[1]
        assert np.max(np.abs(layer2.conditional(0).probs - [0.0, 1.0, 0.0])) <= 1e-12
        assert np.max(np.abs(layer2.conditional(1).probs - [0.0, 0.0, 1.0])) <= 1e-12

    def test_rate_additivity_with_occupancy(self, plan):
        total = sum(l.rate * o for l, o in zip(plan.layers, plan.occupancies))
        assert abs(total - plan.total_rate) <= 1e-15
        assert plan.occupancies == (1.0, 0.5)

    def test_regime_violations(self):
        with pytest.raises(RegimeError):
            plan_ternary_two_layer(0.02, 0.05)
        with pytest.raises(RegimeError):
            plan_ternary_two_layer(0.3, 0.1)


class TestSimulation:
    def test_noiseless_channel_no_errors(self, plan):
        cfg = BlockCodeConfig(n1=40, k1=20, n2=5, k2=8, trials=20, seed=1)
        rep = simulate_layered(plan, instances.identity_channel(3), cfg)
        assert rep.per_layer_error_rate == (0.0, 0.0)

    def test_pilot_thresholds_at_shipped_seed(self, plan, channel):
        # pilot run with this exact seed recorded: (0.0, 0.1181)
        cfg = BlockCodeConfig(n1=400, k1=50, n2=50, k2=8, trials=200, seed=12345)
        rep = simulate_layered(plan, channel, cfg)
        assert rep.per_layer_error_rate[0] < 1e-2
        assert rep.per_layer_error_rate[1] < 0.13

    def test_error_rates_non_increasing_in_block_length(self, plan, channel):
        rates = []
        for n1 in (200, 400, 800):
            cfg = BlockCodeConfig(n1=n1, k1=50, n2=n1 // 8, k2=8, trials=100, seed=99)
            rep = simulate_layered(plan, channel, cfg)
            rates.append(rep.per_layer_error_rate)
        for l in range(2):
            assert rates[0][l] >= rates[1][l] >= rates[2][l]

    def test_information_estimates_near_quadratic_rule(self, channel):
        # eps = 0.05, 1e5 symbols per layer, shipped seed from the pilot run
        eps, seed = 0.05, 297
        cfg = BlockCodeConfig(n1=400, k1=250, trials=1, seed=seed)
        layer1 = greedy_layer(channel, instances.nested_ternary_operating_point(), eps)
        rep1 = simulate_layered(single_layer_plan(layer1), channel, cfg)
        target1 = 0.5 * eps**2 * (2 * ETA) ** 2
        assert rep1.per_layer_symbols[0] >= 10**5
        assert abs(rep1.per_layer_empirical_rate[0] - target1) <= 0.05 * target1

        layer2 = greedy_layer(channel, Distribution([0.0, 0.5, 0.5]), eps, support=(1, 2))
        rep2 = simulate_layered(single_layer_plan(layer2), channel, cfg)
        target2 = 0.5 * eps**2 * (2 + 4 * ETA) * GAMMA**2
        assert rep2.per_layer_symbols[0] >= 10**5
        assert abs(rep2.per_layer_empirical_rate[0] - target2) <= 0.05 * target2

    def test_reproducible_with_seed(self, plan, channel):
        cfg = BlockCodeConfig(n1=100, k1=20, n2=25, k2=4, trials=20, seed=7)
        a = simulate_layered(plan, channel, cfg)
        b = simulate_layered(plan, channel, cfg)
        assert a.per_layer_error_rate == b.per_layer_error_rate
        assert a.per_layer_empirical_rate == b.per_layer_empirical_rate

    def test_rounding_infeasible(self, channel):
        # a small-scale composition cannot be represented in two symbols
        layer = greedy_layer(channel, instances.nested_ternary_operating_point(), 0.05)
        cfg = BlockCodeConfig(n1=2, k1=4, trials=2, seed=0)
        with pytest.raises(ConfigurationError):
            simulate_layered(single_layer_plan(layer), channel, cfg)

    def test_block_structure_validation(self):
        with pytest.raises(ConfigurationError):
            BlockCodeConfig(n1=100, k1=10, n2=30, k2=4, trials=5, seed=0)
