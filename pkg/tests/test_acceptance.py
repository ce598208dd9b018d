"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each test prints a `[acceptance] <criterion>: PASS` line on success. The two
model-recovery criteria reuse the session-scoped fits from conftest so the
whole suite runs the expensive MCMC only once.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from bayesdecide.analysis import (
    allocate_budget,
    build_wolf_cache,
    muskrat_sensitivity,
    wolf_eu_curve,
    wolf_sensitivity,
)
from bayesdecide.cli import main
from bayesdecide.datasets import save_muskrat_dataset, save_wolf_dataset
from bayesdecide.decisions import (
    DiscreteDecisionProblem,
    discrete_expected_utility,
    discrete_optimal_action,
)
from bayesdecide.muskrat import STRUCTURAL_NAMES, MuskratPreferences, capture_prob
from bayesdecide.synthetic import synthetic_muskrat_dataset, synthetic_wolf_dataset
from bayesdecide.wolf import WolfPreferences, sigma_obs_from_ci, simulate_wolf_forward, wolf_risk

from conftest import wolf_point_mass


def report(name):
    print(f"[acceptance] {name}: PASS")


class TestDiscreteOracle:
    def test_table_one_exact(self):
        problem = DiscreteDecisionProblem(
            states=["excellent", "average", "poor"],
            state_probs=[0.3, 0.3, 0.4],
            actions=["repair", "do nothing"],
            utility=[[0, 20], [10, 10], [30, 0]],
        )
        discrete_optimal_action(problem)  # warm-up
        start = time.perf_counter()
        eu_repair = discrete_expected_utility(problem, "repair")
        eu_nothing = discrete_expected_utility(problem, "do nothing")
        best, _ = discrete_optimal_action(problem)
        elapsed = time.perf_counter() - start
        assert eu_repair == 15.0
        assert eu_nothing == 9.0
        assert best == "repair"
        assert elapsed < 1e-3, f"{elapsed * 1e3:.3f} ms"
        report("discrete oracle (15 / 9 / repair, exact, <1ms)")


class TestObservationSdExactness:
    def test_ci_formula(self):
        sigma_obs_from_ci(800, 1200)  # warm-up
        start = time.perf_counter()
        value = sigma_obs_from_ci(800, 1200)
        zero = sigma_obs_from_ci(350.0, 350.0)
        elapsed = time.perf_counter() - start
        assert abs(value - math.log(1.5) / 3.92) < 1e-12
        assert zero == 0.0
        assert elapsed < 1e-3
        report("observation sd from CI (log(1.5)/3.92 within 1e-12, <1ms)")


class TestWolfRecovery:
    def test_growth_rate_recovery(self, wolf_recovery):
        data, truth, sample, elapsed = wolf_recovery
        growth = sample.column("growth_rate")
        lo, hi = np.percentile(growth, [2.5, 97.5])
        assert lo <= truth["growth_rate"] <= hi, (lo, hi)
        for name, diag in sample.diagnostics.items():
            assert diag.rhat < 1.05, (name, diag.rhat)
        assert elapsed < 120.0, f"fit took {elapsed:.0f}s"
        report(
            f"wolf recovery (CI [{lo:.3f},{hi:.3f}] covers 1.15, "
            f"max rhat<1.05, {elapsed:.0f}s<120s)"
        )


class TestClosedFormRisk:
    def test_degenerate_posterior_matches_lognormal_cdf(self):
        start = time.perf_counter()
        growth, proc_sd, n_current = 1.08, 0.09, 1050.0
        n_min = 900.0
        n_reps = 50_000
        for harvest in (0, 120, 260):
            rng = np.random.Generator(np.random.PCG64(2024 + harvest))
            outcomes = simulate_wolf_forward(
                growth, proc_sd, n_current, harvest, n_reps, rng
            )
            estimate = wolf_risk(outcomes, n_min)
            exact = float(
                stats.norm.cdf(
                    (math.log(n_min) - math.log(growth * (n_current - harvest)))
                    / proc_sd
                )
            )
            se = math.sqrt(exact * (1.0 - exact) / n_reps)
            assert abs(estimate - exact) <= 3 * se, (harvest, estimate, exact, se)
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0
        report(f"closed-form risk (3 binomial SEs at 50k reps, {elapsed:.1f}s<10s)")


class TestEUStructure:
    def test_linearity_monotonicity_and_no_harvest_cells(self):
        start = time.perf_counter()
        data, _ = synthetic_wolf_dataset(n_years=8, seed=2)
        posterior = wolf_point_mass(data, growth=1.1, proc_sd=0.1, n_last=1100.0)

        # exact linearity at zero risk aversion
        prefs0 = WolfPreferences(benefit=0.4, cost=0.15, risk_aversion=0.0, n_min=900.0)
        grid = list(range(0, 401, 10))
        curve = wolf_eu_curve(posterior, data, prefs0, grid, n_reps=200, seed=1)
        for a, score in zip(curve.actions, curve.scores):
            assert score.mean == (0.4 - 0.15) * a

        # risk non-decreasing in harvest for every draw, on several grids/seeds
        for seed, step in ((1, 10), (2, 25), (3, 7)):
            test_grid = list(range(0, 400, step))
            cache = build_wolf_cache(
                posterior, data, test_grid, [900.0], n_reps=300, seed=seed
            )
            diffs = np.diff(cache.risk[:, 0, :], axis=0)
            assert np.all(diffs >= 0.0)

        # preference cells with benefit below cost choose zero harvest
        grid_result = wolf_sensitivity(
            posterior, data,
            benefit_values=[0.05, 0.1, 0.2, 0.4],
            cost_values=[0.15, 0.3, 0.5],
            risk_aversion_values=[0.0, 100.0],
            n_min_values=[900.0],
            harvest_grid=grid, n_reps=200, seed=4,
        )
        b_vals = grid_result.axes[0][1]
        c_vals = grid_result.axes[1][1]
        checked = 0
        for b_i, b in enumerate(b_vals):
            for c_i, c in enumerate(c_vals):
                if b < c:
                    assert np.all(grid_result.cells[b_i, c_i] == 0)
                    checked += 1
        assert checked >= 6
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0
        report(
            f"EU structure (exact linearity, CRN-monotone risk, "
            f"{checked} no-harvest cells, {elapsed:.1f}s<60s)"
        )


class TestMuskratRecovery:
    def test_structural_recovery_and_support(self, muskrat_recovery):
        data, truth, sample, elapsed = muskrat_recovery
        intervals = {}
        for name in STRUCTURAL_NAMES:
            col = sample.column(name)
            lo, hi = np.percentile(col, [2.5, 97.5])
            intervals[name] = (lo, hi)
            assert lo <= truth[name] <= hi, (name, lo, hi, truth[name])
        for i, site in enumerate(data.sites):
            for t in range(data.n_seasons):
                col = sample.column(f"N[{site.site_id},{t}]")
                assert np.all(col >= data.catch[i, t])
        assert elapsed < 600.0, f"fit took {elapsed:.0f}s"
        report(
            f"muskrat recovery (all 5 structural CIs cover truth, "
            f"support N>=y holds, {elapsed:.0f}s<600s)"
        )


class TestCloglog:
    def test_zero_effort_and_monotonicity(self):
        for slope in (-2.0, 0.0, 0.37, 4.0):
            assert abs(capture_prob(0.0, 0.0, slope) - (1.0 - math.exp(-1.0))) < 1e-12
        efforts = np.linspace(0.0, 800.0, 100)
        probs = capture_prob(efforts, -3.0, 0.9)
        assert np.all(np.diff(probs) > 0.0)
        report("cloglog (p(0,0,.)=1-1/e within 1e-12; strict monotonicity on 100 pts)")


class TestAllocationSymmetry:
    def test_symmetric_provinces_near_uniform(self, symmetric_muskrat):
        start = time.perf_counter()
        data, posterior = symmetric_muskrat
        budget = 400.0
        result = allocate_budget(
            posterior, data,
            MuskratPreferences(effort_cost=50.0, abundance_penalty=1.0),
            budget=budget, n_candidates=500, refine_rounds=10,
            n_reps=100, seed=100,
        )
        shares = result.best.shares()
        for p, share in zip(data.provinces, shares):
            assert abs(share - 0.25) <= 0.15, (p, share)
        total = sum(result.best.effort_by_province)
        assert abs(total - budget) <= 1e-9 * budget
        elapsed = time.perf_counter() - start
        assert elapsed < 120.0
        report(
            f"allocation symmetry (shares {[round(s, 3) for s in shares]} "
            f"within 0.15 of 0.25; feasible; {elapsed:.0f}s<120s)"
        )


class TestSensitivityMonotonicity:
    def test_five_by_five_grid_with_bitwise_cache(self, symmetric_muskrat):
        start = time.perf_counter()
        data, posterior = symmetric_muskrat
        costs = [0.5, 1.0, 2.0, 4.0, 8.0]
        penalties = [0.25, 0.5, 1.0, 2.0, 4.0]
        effort_grid = [0.0, 10.0, 25.0, 50.0, 100.0, 200.0, 400.0]
        result = muskrat_sensitivity(
            posterior, data, costs, penalties, effort_grid,
            n_reps=100, seed=200, verify_cache=True,
        )
        again = muskrat_sensitivity(
            posterior, data, costs, penalties, effort_grid,
            n_reps=100, seed=200,
        )
        assert result.cache_digest == again.cache_digest  # bitwise-identical cache
        cells = result.cells
        assert cells.shape == (5, 5)
        for row in range(5):
            assert np.all(np.diff(cells[row, :]) >= 0.0)
        for col in range(5):
            assert np.all(np.diff(cells[:, col]) <= 0.0)
        elapsed = time.perf_counter() - start
        assert elapsed < 120.0
        report(
            f"sensitivity monotonicity (5x5 grid monotone both axes, "
            f"bitwise cache, {elapsed:.0f}s<120s)"
        )


class TestCliDeterminism:
    @pytest.fixture(scope="class")
    def cli_workspace(self, tmp_path_factory):
        root = tmp_path_factory.mktemp("acceptance_cli")
        wolf_csv = root / "wolf.csv"
        data, _ = synthetic_wolf_dataset(n_years=10, seed=6)
        save_wolf_dataset(data, wolf_csv)
        sites_csv, obs_csv = root / "sites.csv", root / "observations.csv"
        mdata, _ = synthetic_muskrat_dataset(
            grid_shape=(2, 2), n_provinces=2, n_seasons=4, seed=7
        )
        save_muskrat_dataset(mdata, sites_csv, obs_csv)
        return root

    @staticmethod
    def manifest_without_timestamp(path: Path) -> bytes:
        body = json.loads(path.read_text())
        body.pop("created_utc", None)
        return json.dumps(body, sort_keys=True).encode()

    def run_twice(self, argv, out_base, root, suffixes):
        for tag in ("x", "y"):
            code = main(argv + ["--out", str(root / f"{out_base}_{tag}")])
            assert code == 0
        for suffix in suffixes:
            a = (root / f"{out_base}_x{suffix}").read_bytes()
            b = (root / f"{out_base}_y{suffix}").read_bytes()
            assert a == b, f"{out_base}{suffix} differs between reruns"
        a_manifest = self.manifest_without_timestamp(
            root / f"{out_base}_x.manifest.json"
        )
        b_manifest = self.manifest_without_timestamp(
            root / f"{out_base}_y.manifest.json"
        )
        assert a_manifest == b_manifest

    def test_every_command_is_byte_deterministic(self, cli_workspace):
        root = cli_workspace
        self.run_twice(
            [
                "fit", "--model", "wolf", "--data", str(root / "wolf.csv"),
                "--iters", "800", "--burnin", "200", "--chains", "2", "--seed", "42",
            ],
            "fit", root, [".draws.csv", ".meta.json"],
        )
        self.run_twice(
            [
                "fit", "--model", "muskrat", "--sites", str(root / "sites.csv"),
                "--observations", str(root / "observations.csv"),
                "--iters", "500", "--burnin", "200", "--chains", "2", "--seed", "42",
            ],
            "mfit", root, [".draws.csv", ".meta.json"],
        )
        self.run_twice(
            [
                "decide", "--posterior", str(root / "fit_x"),
                "--b", "0.4", "--c", "0.15", "--alpha", "100", "--nmin", "900",
                "--harvest-grid", "0:100:20", "--reps", "80", "--seed", "5",
            ],
            "decision", root, [""],
        )
        self.run_twice(
            [
                "decide", "--posterior", str(root / "mfit_x"),
                "--c", "50", "--gamma", "1", "--effort-grid", "0,30,120",
                "--reps", "30", "--seed", "5", "--draws-cap", "60",
            ],
            "mdecision", root, [""],
        )
        self.run_twice(
            [
                "allocate", "--posterior", str(root / "mfit_x"),
                "--budget", "150", "--c", "50", "--gamma", "1",
                "--candidates", "16", "--rounds", "2", "--reps", "25",
                "--seed", "5", "--draws-cap", "40",
            ],
            "alloc", root, [""],
        )
        self.run_twice(
            [
                "sweep", "--posterior", str(root / "fit_x"),
                "--b-grid", "0.1,0.4", "--c-grid", "0.15", "--alpha-grid", "0,100",
                "--nmin-grid", "900", "--harvest-grid", "0:100:25",
                "--reps", "60", "--seed", "5", "--verify-cache",
            ],
            "sweep", root, [""],
        )
        report(
            "determinism (fit/decide/allocate/sweep byte-identical on rerun; "
            "manifests identical up to timestamps)"
        )
