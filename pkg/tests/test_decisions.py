import math

import numpy as np
import pytest

from bayesdecide.decisions import (
    ActionScore,
    DiscreteDecisionProblem,
    MCEstimate,
    discrete_expected_utility,
    discrete_optimal_action,
    monte_carlo_expected_utility,
    select_optimal,
)
from bayesdecide.errors import DomainError, ValidationError


def computer_problem():
    return DiscreteDecisionProblem(
        states=["excellent", "average", "poor"],
        state_probs=[0.3, 0.3, 0.4],
        actions=["repair", "do nothing"],
        utility=[[0, 20], [10, 10], [30, 0]],
    )


def brute_force_eu(probs, utility, action_index):
    """Independent oracle: naive loop over states."""
    total = 0.0
    for s in range(len(probs)):
        total += utility[s][action_index] * probs[s]
    return total


class TestDiscreteExpectedUtility:
    def test_repair_scores_15(self):
        assert discrete_expected_utility(computer_problem(), "repair") == 15.0

    def test_do_nothing_scores_9(self):
        assert discrete_expected_utility(computer_problem(), "do nothing") == 9.0

    def test_single_state_returns_cell(self):
        problem = DiscreteDecisionProblem(
            states=["only"], state_probs=[1.0], actions=["a", "b"],
            utility=[[7.0, -2.5]],
        )
        assert discrete_expected_utility(problem, "a") == 7.0
        assert discrete_expected_utility(problem, "b") == -2.5

    def test_unknown_action_is_domain_error(self):
        with pytest.raises(DomainError, match="unknown action"):
            discrete_expected_utility(computer_problem(), "upgrade")

    def test_bad_probability_sum_names_the_sum(self):
        with pytest.raises(ValidationError, match="sum to 0.89"):
            DiscreteDecisionProblem(
                states=["a", "b"], state_probs=[0.3, 0.6],
                actions=["x"], utility=[[1.0], [2.0]],
            )

    def test_renormalize_flag_rescales(self):
        problem = DiscreteDecisionProblem(
            states=["a", "b"], state_probs=[3.0, 1.0],
            actions=["x"], utility=[[1.0], [5.0]], renormalize=True,
        )
        assert problem.state_probs.sum() == pytest.approx(1.0, abs=1e-15)
        assert discrete_expected_utility(problem, "x") == pytest.approx(2.0)

    def test_incomplete_utility_table_rejected(self):
        with pytest.raises(ValidationError, match="finite"):
            DiscreteDecisionProblem(
                states=["a", "b"], state_probs=[0.5, 0.5],
                actions=["x"], utility=[[1.0], [math.nan]],
            )


class TestDiscreteOptimalAction:
    def test_computer_problem_repairs(self):
        best, eu_list = discrete_optimal_action(computer_problem())
        assert best == "repair"
        assert eu_list == [("repair", 15.0), ("do nothing", 9.0)]

    def test_identical_columns_tie_break_to_first(self):
        problem = DiscreteDecisionProblem(
            states=["a", "b"], state_probs=[0.5, 0.5],
            actions=["first", "second"], utility=[[1.0, 1.0], [2.0, 2.0]],
        )
        best, _ = discrete_optimal_action(problem)
        assert best == "first"

    def test_matches_brute_force_on_random_tables(self):
        rng = np.random.Generator(np.random.PCG64(99))
        for _ in range(25):
            probs = rng.dirichlet(np.ones(3))
            utility = rng.normal(size=(3, 3)) * 10
            problem = DiscreteDecisionProblem(
                states=["s0", "s1", "s2"], state_probs=probs,
                actions=["a0", "a1", "a2"], utility=utility, renormalize=True,
            )
            best, eu_list = discrete_optimal_action(problem)
            oracle_eus = [
                brute_force_eu(problem.state_probs, utility, j) for j in range(3)
            ]
            assert best == problem.actions[int(np.argmax(oracle_eus))]
            for (_, eu), oracle in zip(eu_list, oracle_eus):
                assert eu == pytest.approx(oracle, abs=1e-12)

    def test_empty_actions_rejected(self):
        with pytest.raises(ValidationError):
            DiscreteDecisionProblem(
                states=["a"], state_probs=[1.0], actions=[], utility=[[]]
            )


class TestMonteCarloExpectedUtility:
    def test_constant_sequence(self):
        est = monte_carlo_expected_utility([5, 5, 5, 5])
        assert est.mean == 5.0
        assert est.std_error == 0.0
        assert est.degenerate

    def test_two_point_sample_hand_computed(self):
        # sd = sqrt(((0-5)^2 + (10-5)^2) / 1) = sqrt(50); se = sqrt(50)/sqrt(2) = 5
        est = monte_carlo_expected_utility([0, 10])
        assert est.mean == 5.0
        assert est.std_error == pytest.approx(5.0, abs=1e-12)
        assert not est.degenerate

    def test_standard_normal_sample_statistics(self):
        rng = np.random.Generator(np.random.PCG64(4321))
        draws = rng.standard_normal(100_000)
        est = monte_carlo_expected_utility(draws)
        assert abs(est.mean) < 3 * est.std_error
        assert est.n_samples == 100_000

    def test_empty_rejected(self):
        with pytest.raises(ValidationError, match="non-empty"):
            monte_carlo_expected_utility([])

    def test_non_finite_identifies_index(self):
        with pytest.raises(ValidationError, match="index 2"):
            monte_carlo_expected_utility([1.0, 2.0, math.inf, 4.0])

    def test_single_draw_degenerate(self):
        est = monte_carlo_expected_utility([3.5])
        assert est.std_error == 0.0
        assert est.degenerate


class TestSelectOptimal:
    def test_clear_winner_unambiguous(self):
        scores = [
            ActionScore("a1", MCEstimate(15.0, 0.0, 100, degenerate=True)),
            ActionScore("a2", MCEstimate(9.0, 0.0, 100, degenerate=True)),
        ]
        result = select_optimal(scores)
        assert result.best.action_id == "a1"
        assert not result.ambiguous

    def test_single_element(self):
        scores = [ActionScore("only", MCEstimate(1.0, 0.5, 10))]
        result = select_optimal(scores)
        assert result.best.action_id == "only"
        assert result.best_index == 0
        assert not result.ambiguous
        assert result.runner_up_index is None

    def test_close_scores_flag_ambiguity(self):
        # |1.0 - 0.9| = 0.1 < 2 * sqrt(0.5^2 + 0.5^2) ~ 1.414
        scores = [
            ActionScore("a1", MCEstimate(1.0, 0.5, 10)),
            ActionScore("a2", MCEstimate(0.9, 0.5, 10)),
        ]
        result = select_optimal(scores)
        assert result.best.action_id == "a1"
        assert result.ambiguous
        assert result.runner_up_index == 1

    def test_tie_breaks_to_lowest_index(self):
        scores = [
            ActionScore("a1", MCEstimate(2.0, 0.0, 5, degenerate=True)),
            ActionScore("a2", MCEstimate(2.0, 0.0, 5, degenerate=True)),
        ]
        assert select_optimal(scores).best_index == 0

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            select_optimal([])

    def test_duplicate_action_ids_rejected(self):
        scores = [
            ActionScore("same", MCEstimate(1.0, 0.1, 5)),
            ActionScore("same", MCEstimate(2.0, 0.1, 5)),
        ]
        with pytest.raises(ValidationError, match="unique"):
            select_optimal(scores)


class TestInvariants:
    def test_affine_invariance_of_argmax(self):
        rng = np.random.Generator(np.random.PCG64(7))
        for _ in range(20):
            probs = rng.dirichlet(np.ones(4))
            utility = rng.normal(size=(4, 3)) * 5
            k = float(rng.uniform(0.1, 10))
            m = float(rng.normal(0, 20))
            base = DiscreteDecisionProblem(
                states=list("abcd"), state_probs=probs,
                actions=["x", "y", "z"], utility=utility, renormalize=True,
            )
            scaled = DiscreteDecisionProblem(
                states=list("abcd"), state_probs=probs,
                actions=["x", "y", "z"], utility=k * utility + m, renormalize=True,
            )
            best_base, eu_base = discrete_optimal_action(base)
            best_scaled, eu_scaled = discrete_optimal_action(scaled)
            assert best_base == best_scaled
            for (_, eu_b), (_, eu_s) in zip(eu_base, eu_scaled):
                assert eu_s == pytest.approx(k * eu_b + m, abs=1e-9)

    def test_linearity_in_utility_table(self):
        rng = np.random.Generator(np.random.PCG64(8))
        probs = rng.dirichlet(np.ones(3))
        u1 = rng.normal(size=(3, 2))
        u2 = rng.normal(size=(3, 2))

        def eu(utility, action):
            problem = DiscreteDecisionProblem(
                states=["a", "b", "c"], state_probs=probs,
                actions=["x", "y"], utility=utility, renormalize=True,
            )
            return discrete_expected_utility(problem, action)

        for action in ("x", "y"):
            assert eu(u1 + u2, action) == pytest.approx(
                eu(u1, action) + eu(u2, action), abs=1e-12
            )
            assert eu(2.5 * u1, action) == pytest.approx(2.5 * eu(u1, action), abs=1e-12)

    def test_monte_carlo_consistency(self):
        rng = np.random.Generator(np.random.PCG64(31415))
        mu = 3.0
        draws = rng.normal(mu, 2.0, size=100_000)
        est = monte_carlo_expected_utility(draws)
        assert abs(est.mean - mu) < 4 * est.std_error

    def test_indicator_identity(self):
        rng = np.random.Generator(np.random.PCG64(2718))
        samples = rng.lognormal(mean=6.5, sigma=0.3, size=10_000)
        n_min = 700.0
        indicators = (samples < n_min).astype(float)
        per_draw_average = monte_carlo_expected_utility(indicators).mean
        frequency = float(np.count_nonzero(samples < n_min)) / samples.size
        assert per_draw_average == frequency
