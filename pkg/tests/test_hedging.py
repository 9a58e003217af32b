import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvhedge.coefficients import coefficient_system, opportunity_process
from mvhedge.hedging import (hedging_error, optimal_strategy, value_at,
                             verify_optimality)
from mvhedge.oracle import project_strategy
from mvhedge.tree import PredictableControl, stochastic_exponential
from treegen import random_payoff, random_probe, random_tree

seeds = st.integers(min_value=0, max_value=10**6)


class TestOptimalStrategy:
    def test_replication(self, binomial):
        coeffs, controls = coefficient_system(binomial, binomial.payoffs())
        theta, wealth = optimal_strategy(binomial, coeffs, controls, 10.0)
        assert theta["r"] == pytest.approx(1.0, abs=1e-14)
        assert wealth["u"] == pytest.approx(11.0) and wealth["d"] == pytest.approx(9.0)
        assert hedging_error(binomial, binomial.payoffs(), theta, 10.0) == \
            pytest.approx(0.0, abs=1e-14)

    def test_pure_investment_is_exponential(self, binomial2):
        zero = {nid: 0.0 for nid in binomial2.terminal_ids()}
        coeffs, controls = coefficient_system(binomial2, zero)
        theta, wealth = optimal_strategy(binomial2, coeffs, controls, 1.0)
        gamma = PredictableControl(
            {nid: -controls.a[nid] for nid in binomial2.nonterminal_ids()})
        expo = stochastic_exponential(binomial2, gamma, "r")
        for nid in binomial2.ids():
            assert wealth[nid] == pytest.approx(expo[nid], rel=1e-12)

    def test_cone_vertex(self, binomial2):
        zero = {nid: 0.0 for nid in binomial2.terminal_ids()}
        coeffs, controls = coefficient_system(binomial2, zero)
        theta, wealth = optimal_strategy(binomial2, coeffs, controls, 0.0)
        assert set(theta.values()) == {0.0}
        assert set(wealth.values()) == {0.0}

    @given(seeds)
    def test_affine_in_capital(self, seed):
        tree = random_tree(seed, max_depth=3)
        payoff = random_payoff(tree, seed)
        coeffs, controls = coefficient_system(tree, payoff)
        zero = {nid: 0.0 for nid in tree.terminal_ids()}
        coeffs0, controls0 = coefficient_system(tree, zero)
        base, _ = optimal_strategy(tree, coeffs, controls, 0.0)
        unit, _ = optimal_strategy(tree, coeffs0, controls0, 1.0)
        for x in (-1.0, 0.5, 3.0):
            theta, _ = optimal_strategy(tree, coeffs, controls, x)
            for nid in tree.nonterminal_ids():
                assert theta[nid] == pytest.approx(
                    base[nid] + x * unit[nid], abs=1e-10, rel=1e-10)

    @given(seeds)
    def test_pure_investment_scaling(self, seed):
        tree = random_tree(seed, max_depth=3)
        zero = {nid: 0.0 for nid in tree.terminal_ids()}
        coeffs, controls = coefficient_system(tree, zero)
        y2, _ = opportunity_process(tree)
        for x in (-1.0, 0.5, 3.0):
            theta, _ = optimal_strategy(tree, coeffs, controls, x)
            err = hedging_error(tree, zero, theta, x)
            assert err == pytest.approx(x * x * y2[tree.root],
                                        rel=1e-10, abs=1e-12)

    def test_zero_wealth_absorption(self, binomial2):
        # drive the pure-investment wealth to zero on an edge, then the
        # optimal wealth stays zero on the whole subtree below
        zero = {nid: 0.0 for nid in binomial2.terminal_ids()}
        coeffs, controls = coefficient_system(binomial2, zero)
        theta, wealth = optimal_strategy(binomial2, coeffs, controls, 0.0,
                                         start="r")
        assert wealth["r"] == 0.0
        for nid in binomial2.ids():
            assert wealth[nid] == 0.0 and (nid not in theta or theta[nid] == 0.0)


class TestValueAt:
    def test_worked_values(self, binomial):
        coeffs, _ = coefficient_system(binomial, binomial.payoffs())
        assert value_at(coeffs, "r", 10.0) == 0.0
        assert value_at(coeffs, "r", 0.0) == 96.0

    def test_zero_payoff_zero_capital(self, binomial2):
        zero = {nid: 0.0 for nid in binomial2.terminal_ids()}
        coeffs, _ = coefficient_system(binomial2, zero)
        for nid in binomial2.ids():
            assert value_at(coeffs, nid, 0.0) == 0.0

    def test_inconsistent_coefficients_raise(self, binomial):
        from mvhedge.coefficients import CoefficientTriple
        from mvhedge.tree import AdaptedProcess
        bad = CoefficientTriple(
            AdaptedProcess.constant(binomial, -1.0),
            AdaptedProcess.constant(binomial, 0.0),
            AdaptedProcess.constant(binomial, 1.0))
        with pytest.raises(ValueError, match="coefficients inconsistent"):
            value_at(bad, "r", 0.0)


class TestVerifyOptimality:
    def test_probe_equals_star(self, binomial):
        coeffs, controls = coefficient_system(binomial, binomial.payoffs())
        theta, _ = optimal_strategy(binomial, coeffs, controls, 10.0)
        report = verify_optimality(binomial, coeffs, theta, theta, 10.0)
        assert report.max_abs_star_drift <= 1e-12
        assert abs(report.min_probe_drift) <= 1e-12
        assert report.passed

    def test_zero_probe_has_positive_drift(self, binomial):
        coeffs, controls = coefficient_system(binomial, binomial.payoffs())
        theta, _ = optimal_strategy(binomial, coeffs, controls, 10.0)
        probe = PredictableControl.constant(binomial, 0.0)
        report = verify_optimality(binomial, coeffs, theta, probe, 10.0)
        # not hedging costs exactly the expected squared miss of one step
        assert report.probe_drift["r"] == pytest.approx(1.0, rel=1e-12)
        assert report.passed

    @given(seeds)
    def test_random_probes_never_beat_optimal(self, seed):
        tree = random_tree(seed, max_depth=3)
        payoff = random_payoff(tree, seed)
        coeffs, controls = coefficient_system(tree, payoff)
        theta, _ = optimal_strategy(tree, coeffs, controls, 1.0)
        for k in range(5):
            probe = random_probe(tree, seed * 31 + k)
            report = verify_optimality(tree, coeffs, theta, probe, 1.0)
            assert report.max_abs_star_drift <= 1e-10
            assert report.min_probe_drift >= -1e-10
            assert report.passed


class TestHedgingError:
    def test_zero_strategy(self, binomial):
        probe = PredictableControl.constant(binomial, 0.0)
        err = hedging_error(binomial, binomial.payoffs(), probe, 0.0)
        assert err == pytest.approx(105.0, rel=1e-14)

    @given(seeds)
    def test_optimal_error_equals_root_value(self, seed):
        tree = random_tree(seed, max_depth=3)
        payoff = random_payoff(tree, seed)
        coeffs, controls = coefficient_system(tree, payoff)
        for x in (-1.0, 0.0, 2.0):
            theta, _ = optimal_strategy(tree, coeffs, controls, x)
            err = hedging_error(tree, payoff, theta, x)
            assert err == pytest.approx(value_at(coeffs, tree.root, x),
                                        abs=1e-10, rel=1e-10)

    @given(seeds)
    def test_probe_strategies_never_beat_optimal(self, seed):
        tree = random_tree(seed, max_depth=3)
        payoff = random_payoff(tree, seed)
        coeffs, controls = coefficient_system(tree, payoff)
        theta, _ = optimal_strategy(tree, coeffs, controls, 1.0)
        best = hedging_error(tree, payoff, theta, 1.0)
        for k in range(10):
            probe = random_probe(tree, seed * 997 + k)
            assert hedging_error(tree, payoff, probe, 1.0) >= best - 1e-10

    @given(seeds)
    def test_oracle_strategy_agrees(self, seed):
        tree = random_tree(seed, max_depth=3)
        payoff = random_payoff(tree, seed)
        coeffs, controls = coefficient_system(tree, payoff)
        theta, _ = optimal_strategy(tree, coeffs, controls, 1.0)
        theta_oracle, value = project_strategy(tree, payoff, 1.0)
        for nid in tree.nonterminal_ids():
            assert theta[nid] == pytest.approx(theta_oracle[nid],
                                               abs=1e-8, rel=1e-8)
        assert hedging_error(tree, payoff, theta, 1.0) == \
            pytest.approx(value, abs=1e-10, rel=1e-10)
