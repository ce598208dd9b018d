import numpy as np
import pytest

from bayesdecide.analysis import (
    EUCurve,
    allocate_budget,
    allocation_share_profile,
    build_uniform_effort_cache,
    build_wolf_cache,
    default_harvest_grid,
    muskrat_sensitivity,
    uniform_effort_curve,
    wolf_eu_curve,
    wolf_sensitivity,
    wolf_survival_curve,
)
from bayesdecide.decisions import monte_carlo_expected_utility
from bayesdecide.errors import ValidationError
from bayesdecide.muskrat import MuskratPreferences
from bayesdecide.synthetic import symmetric_muskrat_dataset, synthetic_wolf_dataset
from bayesdecide.wolf import WolfPreferences, simulate_wolf_forward

from conftest import muskrat_point_mass, wolf_point_mass

BASELINE_WOLF = WolfPreferences(benefit=0.4, cost=0.15, risk_aversion=100.0, n_min=900.0)
BASELINE_MUSKRAT = MuskratPreferences(effort_cost=50.0, abundance_penalty=1.0)


@pytest.fixture(scope="module")
def wolf_setup():
    data, _ = synthetic_wolf_dataset(n_years=8, seed=2)
    posterior = wolf_point_mass(data, growth=1.1, proc_sd=0.1, n_last=1100.0)
    return data, posterior


class TestWolfEUCurve:
    def test_zero_risk_aversion_is_exactly_linear(self, wolf_setup):
        data, posterior = wolf_setup
        prefs = WolfPreferences(benefit=0.4, cost=0.15, risk_aversion=0.0, n_min=900.0)
        grid = list(range(0, 301, 50))
        curve = wolf_eu_curve(posterior, data, prefs, grid, n_reps=50, seed=1)
        for a, score in zip(curve.actions, curve.scores):
            assert score.mean == (0.4 - 0.15) * a
        assert curve.optimum_index == len(grid) - 1

    def test_equal_benefit_cost_optimum_at_zero(self, wolf_setup):
        data, posterior = wolf_setup
        prefs = WolfPreferences(benefit=0.2, cost=0.2, risk_aversion=50.0, n_min=900.0)
        curve = wolf_eu_curve(posterior, data, prefs, range(0, 400, 25), n_reps=200, seed=2)
        assert curve.optimum_action == 0

    def test_baseline_prefs_interior_optimum_rise_then_fall(self, wolf_setup):
        data, posterior = wolf_setup
        grid = list(range(0, 401, 10))
        curve = wolf_eu_curve(posterior, data, BASELINE_WOLF, grid, n_reps=400, seed=3)
        means = [s.mean for s in curve.scores]
        best = curve.optimum_index
        assert 0 < best < len(grid) - 1
        assert means[best] > means[0]
        assert means[best] > means[-1]

    def test_negative_grid_rejected(self, wolf_setup):
        data, posterior = wolf_setup
        with pytest.raises(ValidationError, match="negative"):
            wolf_eu_curve(posterior, data, BASELINE_WOLF, [-5, 0, 5], n_reps=10, seed=0)

    def test_matches_per_draw_operation(self, wolf_setup):
        # the vectorized cache and the per-draw simulator share noise streams
        data, posterior = wolf_setup
        grid = [0, 120, 240]
        n_reps = 64
        cache = build_wolf_cache(posterior, data, grid, [900.0], n_reps=n_reps, seed=9)
        growth = posterior.column("growth_rate")
        proc = posterior.column("process_sd")
        n_last = posterior.column(f"N_{data.years[-1]}")
        streams = np.random.SeedSequence(9).spawn(posterior.n_draws)
        for d in range(posterior.n_draws):
            rng = np.random.Generator(np.random.PCG64(streams[d]))
            for a_i, a in enumerate(grid):
                reps = simulate_wolf_forward(
                    growth[d], proc[d], n_last[d], a, n_reps,
                    np.random.Generator(np.random.PCG64(streams[d])),
                )
                assert cache.risk[a_i, 0, d] == np.mean(reps < 900.0)

    def test_eu_decomposition(self, wolf_setup):
        data, posterior = wolf_setup
        grid = [0, 100, 200]
        cache = build_wolf_cache(posterior, data, grid, [900.0], n_reps=128, seed=5)
        curve = wolf_eu_curve(posterior, data, BASELINE_WOLF, grid, cache=cache)
        net = BASELINE_WOLF.benefit - BASELINE_WOLF.cost
        for a_i, a in enumerate(grid):
            risks = cache.risk[a_i, 0]
            per_draw = net * a - BASELINE_WOLF.risk_aversion * risks
            averaged = monte_carlo_expected_utility(per_draw)
            assert curve.scores[a_i].mean == pytest.approx(averaged.mean, rel=1e-12)
            assert curve.scores[a_i].std_error == averaged.std_error

    def test_survival_curve_complements_risk(self, wolf_setup):
        data, posterior = wolf_setup
        grid = [0, 100, 200, 300]
        cache = build_wolf_cache(posterior, data, grid, [900.0], n_reps=128, seed=6)
        survival = wolf_survival_curve(cache, 900.0)
        assert np.allclose(survival + cache.pooled_risk()[:, 0], 1.0)
        assert np.all(np.diff(survival) <= 0)

    def test_default_grid_spans_half_median(self, wolf_setup):
        data, posterior = wolf_setup
        grid = default_harvest_grid(posterior, data)
        assert grid[0] == 0
        assert grid[-1] == int(np.floor(0.5 * 1100.0))


class TestWolfSensitivity:
    def test_structure_and_paper_cells(self, wolf_setup):
        data, posterior = wolf_setup
        result = wolf_sensitivity(
            posterior, data,
            benefit_values=[0.1, 0.4],
            cost_values=[0.15, 0.3],
            risk_aversion_values=[0.0, 100.0],
            n_min_values=[800.0, 900.0],
            harvest_grid=range(0, 401, 20),
            n_reps=100, seed=4,
        )
        assert result.cells.shape == (2, 2, 2, 2)
        # benefit below cost -> never harvest
        assert np.all(result.cells[0, :, :, :] == 0)  # b=0.1 < both costs
        # no risk aversion and b > c -> grid maximum
        assert np.all(result.cells[1, 0, 0, :] == 400)

    def test_alpha_monotonicity_against_cached_brute_force(self, wolf_setup):
        data, posterior = wolf_setup
        alphas = [0.0, 20.0, 50.0, 100.0, 400.0]
        grid = list(range(0, 401, 10))
        result = wolf_sensitivity(
            posterior, data,
            benefit_values=[0.4], cost_values=[0.15],
            risk_aversion_values=alphas, n_min_values=[900.0],
            harvest_grid=grid, n_reps=200, seed=8,
        )
        optima = result.cells[0, 0, :, 0]
        assert np.all(np.diff(optima) <= 0)
        # brute-force re-derivation from an identically seeded cache
        cache = build_wolf_cache(posterior, data, grid, [900.0], n_reps=200, seed=8)
        pooled = cache.pooled_risk()[:, 0]
        for a_i, alpha in enumerate(alphas):
            eu = [(0.4 - 0.15) * a - alpha * r for a, r in zip(grid, pooled)]
            assert optima[a_i] == grid[int(np.argmax(eu))]

    def test_cache_reproducible_bitwise(self, wolf_setup):
        data, posterior = wolf_setup
        result = wolf_sensitivity(
            posterior, data, [0.4], [0.15], [100.0], [900.0],
            harvest_grid=range(0, 200, 20), n_reps=60, seed=11, verify_cache=True,
        )
        again = wolf_sensitivity(
            posterior, data, [0.4], [0.15], [100.0], [900.0],
            harvest_grid=range(0, 200, 20), n_reps=60, seed=11,
        )
        assert result.cache_digest == again.cache_digest
        assert np.array_equal(result.cells, again.cells)


@pytest.fixture(scope="module")
def muskrat_setup(symmetric_muskrat):
    return symmetric_muskrat


class TestUniformEffortCurve:
    def test_no_abundance_penalty_prefers_zero_effort(self, muskrat_setup):
        data, posterior = muskrat_setup
        prefs = MuskratPreferences(effort_cost=5.0, abundance_penalty=0.0)
        grid = [0.0, 20.0, 40.0, 80.0]
        curve = uniform_effort_curve(posterior, data, prefs, grid, n_reps=40, seed=1)
        assert curve.optimum_action == 0.0
        for e, score in zip(grid, curve.scores):
            assert score.mean == -5.0 * data.n_provinces * e

    def test_free_effort_with_penalty_prefers_max(self, muskrat_setup):
        data, posterior = muskrat_setup
        prefs = MuskratPreferences(effort_cost=0.0, abundance_penalty=1.0)
        grid = [0.0, 50.0, 200.0, 800.0, 3200.0]
        curve = uniform_effort_curve(posterior, data, prefs, grid, n_reps=100, seed=2)
        means = [s.mean for s in curve.scores]
        assert curve.optimum_index == len(grid) - 1
        assert means == sorted(means)

    def test_baseline_saturating_shape(self, muskrat_setup):
        data, posterior = muskrat_setup
        prefs = MuskratPreferences(effort_cost=1.0, abundance_penalty=1.0)
        grid = [0.0, 25.0, 50.0, 100.0, 200.0, 400.0, 800.0]
        curve = uniform_effort_curve(posterior, data, prefs, grid, n_reps=200, seed=3)
        means = [s.mean for s in curve.scores]
        # steep initial gain, then marginal gains shrink (saturation)
        assert means[1] - means[0] > 0
        assert means[1] - means[0] > means[3] - means[2]

    def test_empty_grid_rejected(self, muskrat_setup):
        data, posterior = muskrat_setup
        with pytest.raises(ValidationError):
            uniform_effort_curve(posterior, data, BASELINE_MUSKRAT, [], n_reps=10, seed=0)


class TestMuskratSensitivity:
    def test_monotone_in_both_preferences(self, muskrat_setup):
        data, posterior = muskrat_setup
        result = muskrat_sensitivity(
            posterior, data,
            effort_cost_values=[0.5, 1.0, 2.0, 4.0, 8.0],
            abundance_penalty_values=[0.25, 0.5, 1.0, 2.0, 4.0],
            effort_grid=[0.0, 10.0, 25.0, 50.0, 100.0, 200.0, 400.0],
            n_reps=120, seed=5, verify_cache=True,
        )
        cells = result.cells
        for row in range(cells.shape[0]):
            assert np.all(np.diff(cells[row, :]) >= 0)  # more penalty, more effort
        for col in range(cells.shape[1]):
            assert np.all(np.diff(cells[:, col]) <= 0)  # more cost, less effort

    def test_zero_penalty_column_is_zero(self, muskrat_setup):
        data, posterior = muskrat_setup
        result = muskrat_sensitivity(
            posterior, data,
            effort_cost_values=[1.0, 5.0],
            abundance_penalty_values=[0.0, 1.0],
            effort_grid=[0.0, 30.0, 90.0],
            n_reps=40, seed=6,
        )
        assert np.all(result.cells[:, 0] == 0.0)


class TestAllocateBudget:
    def test_symmetric_provinces_stay_near_uniform(self, muskrat_setup):
        data, posterior = muskrat_setup
        result = allocate_budget(
            posterior, data, BASELINE_MUSKRAT, budget=400.0,
            n_candidates=200, refine_rounds=8, n_reps=80, seed=7,
        )
        shares = result.best.shares()
        for share in shares:
            assert abs(share - 0.25) < 0.15
        assert sum(result.best.effort_by_province) == pytest.approx(400.0, abs=4e-7)

    def test_feasibility_of_every_candidate(self, muskrat_setup):
        data, posterior = muskrat_setup
        result = allocate_budget(
            posterior, data, BASELINE_MUSKRAT, budget=100.0,
            n_candidates=50, refine_rounds=2, n_reps=30, seed=8,
        )
        for alloc in result.candidates.actions:
            total = sum(alloc.effort_by_province)
            assert total <= 100.0 * (1 + 1e-9)
            assert total >= 100.0 * (1 - 1e-9)
            assert all(a >= 0 for a in alloc.effort_by_province)

    def test_refinement_never_decreases_paired_eu(self, muskrat_setup):
        data, posterior = muskrat_setup
        result = allocate_budget(
            posterior, data, BASELINE_MUSKRAT, budget=300.0,
            n_candidates=30, refine_rounds=6, n_reps=60, seed=9,
        )
        initial_best = max(s.mean for s in result.candidates.scores)
        assert result.best_score.mean >= initial_best

    def test_unproductive_province_gets_below_uniform_share(self):
        data, truth = symmetric_muskrat_dataset(
            n_provinces=4, sites_per_province=2, n_seasons=6, seed=31
        )
        # province 0 has almost nothing left to remove; others are dense
        n_last = np.full(data.n_sites, 260.0)
        n_last[:2] = 1.0
        posterior = muskrat_point_mass(data, truth, n_last)
        result = allocate_budget(
            posterior, data, MuskratPreferences(effort_cost=0.0, abundance_penalty=1.0),
            budget=400.0, n_candidates=150, refine_rounds=8, n_reps=80, seed=10,
        )
        shares = result.best.shares()
        assert shares[0] < 0.25
        assert shares[0] < max(shares[1:])

    def test_tiny_budget_flags_ambiguity(self, muskrat_setup):
        data, posterior = muskrat_setup
        result = allocate_budget(
            posterior, data, BASELINE_MUSKRAT, budget=1e-6,
            n_candidates=20, refine_rounds=1, n_reps=30, seed=11,
        )
        assert result.candidates.ambiguous

    def test_bad_budget_rejected(self, muskrat_setup):
        data, posterior = muskrat_setup
        with pytest.raises(ValidationError):
            allocate_budget(posterior, data, BASELINE_MUSKRAT, budget=0.0)

    def test_candidate_floor_enforced(self, muskrat_setup):
        data, posterior = muskrat_setup
        with pytest.raises(ValidationError, match="n_candidates"):
            allocate_budget(
                posterior, data, BASELINE_MUSKRAT, budget=10.0, n_candidates=3
            )

    def test_reproducible(self, muskrat_setup):
        data, posterior = muskrat_setup
        kwargs = dict(
            budget=250.0, n_candidates=40, refine_rounds=3, n_reps=40, seed=12
        )
        r1 = allocate_budget(posterior, data, BASELINE_MUSKRAT, **kwargs)
        r2 = allocate_budget(posterior, data, BASELINE_MUSKRAT, **kwargs)
        assert r1.best.effort_by_province == r2.best.effort_by_province
        assert r1.best_score == r2.best_score


class TestAllocationShareProfile:
    def test_shares_sum_to_one(self, muskrat_setup):
        data, posterior = muskrat_setup
        profile = allocation_share_profile(
            posterior, data, BASELINE_MUSKRAT, budgets=[100.0, 200.0, 400.0],
            n_candidates=40, refine_rounds=2, n_reps=30, seed=13,
        )
        sums = profile.shares.sum(axis=1)
        assert np.all(np.abs(sums - 1.0) < 1e-9)

    def test_heterogeneous_provinces_split_unevenly(self):
        data, truth = symmetric_muskrat_dataset(
            n_provinces=3, sites_per_province=2, n_seasons=6, seed=32
        )
        n_last = np.array([420.0, 420.0, 60.0, 60.0, 60.0, 60.0])
        posterior = muskrat_point_mass(data, truth, n_last)
        result = allocate_budget(
            posterior, data, MuskratPreferences(effort_cost=0.0, abundance_penalty=1.0),
            budget=300.0, n_candidates=120, refine_rounds=8, n_reps=80, seed=14,
        )
        shares = result.best.shares()
        assert shares[0] > 1.0 / 3.0  # the dense province is prioritized

    def test_budgets_must_increase(self, muskrat_setup):
        data, posterior = muskrat_setup
        with pytest.raises(ValidationError, match="increasing"):
            allocation_share_profile(
                posterior, data, BASELINE_MUSKRAT, budgets=[200.0, 100.0],
            )


class TestCommonRandomNumbers:
    def test_preferences_do_not_touch_simulated_outcomes(self, muskrat_setup):
        data, posterior = muskrat_setup
        grid = [0.0, 40.0, 160.0]
        cache1, _ = build_uniform_effort_cache(posterior, data, grid, n_reps=50, seed=15)
        cache2, _ = build_uniform_effort_cache(posterior, data, grid, n_reps=50, seed=15)
        assert np.array_equal(cache1, cache2)
        prefs_a = MuskratPreferences(effort_cost=1.0, abundance_penalty=0.5)
        prefs_b = MuskratPreferences(effort_cost=9.0, abundance_penalty=4.0)
        curve_a = uniform_effort_curve(posterior, data, prefs_a, grid, n_reps=50, seed=15)
        curve_b = uniform_effort_curve(posterior, data, prefs_b, grid, n_reps=50, seed=15)
        assert curve_a.config == curve_b.config

    def test_argmax_affine_invariance(self, wolf_setup):
        data, posterior = wolf_setup
        grid = list(range(0, 301, 20))
        base = wolf_eu_curve(posterior, data, BASELINE_WOLF, grid, n_reps=150, seed=16)
        scaled_prefs = WolfPreferences(
            benefit=3 * BASELINE_WOLF.benefit, cost=3 * BASELINE_WOLF.cost,
            risk_aversion=3 * BASELINE_WOLF.risk_aversion, n_min=BASELINE_WOLF.n_min,
        )
        scaled = wolf_eu_curve(posterior, data, scaled_prefs, grid, n_reps=150, seed=16)
        assert base.optimum_index == scaled.optimum_index
        for s_base, s_scaled in zip(base.scores, scaled.scores):
            assert s_scaled.mean == pytest.approx(3 * s_base.mean, rel=1e-12, abs=1e-12)

    def test_province_permutation_symmetry(self, muskrat_setup):
        data, posterior = muskrat_setup
        from bayesdecide.analysis import MuskratSimulator

        sim = MuskratSimulator(posterior, data, n_reps=400, seed=17)
        base = np.array([160.0, 80.0, 40.0, 20.0])
        scores = []
        for perm in ([0, 1, 2, 3], [3, 2, 1, 0], [1, 0, 3, 2]):
            est = sim.score(base[perm], BASELINE_MUSKRAT)
            scores.append(est)
        spread = max(s.mean for s in scores) - min(s.mean for s in scores)
        combined_se = max(s.std_error for s in scores)
        assert spread < 4 * combined_se


class TestEUCurveInvariants:
    def test_optimum_index_validated(self):
        from bayesdecide.analysis import CurveConfig
        from bayesdecide.decisions import MCEstimate

        with pytest.raises(ValidationError, match="optimum_index"):
            EUCurve(
                actions=(0, 1),
                scores=(MCEstimate(1.0, 0.0, 4, True), MCEstimate(2.0, 0.0, 4, True)),
                optimum_index=0,
                ambiguous=False,
                config=CurveConfig(n_draws=4, n_reps=1, seed=0),
            )
