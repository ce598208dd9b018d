"""Decision analysis over fitted posteriors.

Builds expected-utility curves for candidate actions, optimizes effort
allocations under a budget, and runs preference sensitivity sweeps. All
routines use common random numbers: the simulated outcomes for a given
(posterior, data, action grid, seed) are preference-independent and cached,
so sweeping preferences only reweights cached outcomes and comparing actions
shares the same noise streams.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import binom as binom_dist
from scipy.stats import poisson as poisson_dist

from . import muskrat as mk
from . import wolf as wf
from .decisions import ActionScore, MCEstimate, monte_carlo_expected_utility, select_optimal
from .errors import BayesdecideError, ValidationError
from .mcmc import PosteriorSample

DEFAULT_DRAWS_CAP = 2000
WOLF_DEFAULT_REPS = 500
MUSKRAT_DEFAULT_REPS = 100


@dataclass(frozen=True)
class CurveConfig:
    n_draws: int
    n_reps: int
    seed: int


@dataclass(frozen=True)
class EUCurve:
    """Scored action grid with the index of the expected-utility maximum."""

    actions: tuple
    scores: tuple[MCEstimate, ...]
    optimum_index: int
    ambiguous: bool
    config: CurveConfig

    def __post_init__(self):
        if len(self.actions) != len(self.scores):
            raise ValidationError("actions and scores must be aligned")
        means = [s.mean for s in self.scores]
        if self.optimum_index != int(np.argmax(means)):
            raise ValidationError("optimum_index must point at the maximal mean")

    @property
    def optimum_action(self):
        return self.actions[self.optimum_index]


@dataclass(frozen=True)
class SensitivityGrid:
    """Optimal action per preference combination, on a full factorial grid."""

    axes: tuple[tuple[str, tuple[float, ...]], ...]
    cells: np.ndarray
    cache_digest: str
    config: CurveConfig

    def __post_init__(self):
        shape = tuple(len(values) for _, values in self.axes)
        if self.cells.shape != shape:
            raise ValidationError(
                f"cells shape {self.cells.shape} does not match axes {shape}"
            )


@dataclass(frozen=True)
class BudgetAllocationResult:
    """Refined best allocation plus the scored candidate set it came from."""

    best: mk.Allocation
    best_score: MCEstimate
    candidates: EUCurve
    refine_steps: int


@dataclass(frozen=True)
class AllocationShareProfile:
    """Optimal per-province effort shares across a range of budgets."""

    budgets: tuple[float, ...]
    provinces: tuple[str, ...]
    shares: np.ndarray  # (n_budgets, n_provinces)


def _thin_indices(n: int, cap: int) -> np.ndarray:
    if cap < 1:
        raise ValidationError("draws cap must be >= 1")
    if n <= cap:
        return np.arange(n)
    return np.floor(np.linspace(0, n, cap, endpoint=False)).astype(np.int64)


def _digest(*arrays: np.ndarray) -> str:
    h = hashlib.sha256()
    for arr in arrays:
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


def _estimate(mean_exact: float, per_draw: np.ndarray) -> MCEstimate:
    # Mean comes from the exact decomposition (deterministic term + weighted
    # pooled outcome); the spread of per-draw utilities supplies the MC error.
    mc = monte_carlo_expected_utility(per_draw)
    return MCEstimate(
        mean=mean_exact,
        std_error=mc.std_error,
        n_samples=mc.n_samples,
        degenerate=mc.degenerate,
    )


# ---------------------------------------------------------------------------
# Wolf: scalar harvest decisions


@dataclass(frozen=True)
class WolfSimulationCache:
    """Per-draw threshold risks for every (harvest, threshold) pair.

    ``risk[a, m, n]`` is the fraction of replicates below threshold m when
    harvest a is applied to posterior draw n. Preferences never enter, so one
    cache serves an entire sensitivity sweep.
    """

    harvest_grid: tuple[int, ...]
    n_min_values: tuple[float, ...]
    risk: np.ndarray
    n_draws: int
    n_reps: int
    seed: int

    def digest(self) -> str:
        return _digest(self.risk)

    def pooled_risk(self) -> np.ndarray:
        """(n_actions, n_thresholds) risk frequencies pooled over draws."""
        return self.risk.mean(axis=2)


def _validate_harvest_grid(harvest_grid) -> np.ndarray:
    grid = np.asarray(harvest_grid, dtype=float)
    if grid.size == 0:
        raise ValidationError("harvest grid must be non-empty")
    if np.any(grid < 0):
        raise ValidationError("harvest grid must not contain negative values")
    if np.any(grid != np.round(grid)):
        raise ValidationError("harvest values must be integers")
    return grid.astype(np.int64)


def _wolf_draw_arrays(posterior: PosteriorSample, data: wf.WolfDataset, draws_cap: int):
    idx = _thin_indices(posterior.n_draws, draws_cap)
    growth = posterior.column(wf.GROWTH_RATE)[idx]
    proc_sd = posterior.column(wf.PROCESS_SD)[idx]
    n_last = posterior.column(f"N_{data.years[-1]}")[idx]
    return growth, proc_sd, n_last


def build_wolf_cache(
    posterior: PosteriorSample,
    data: wf.WolfDataset,
    harvest_grid,
    n_min_values: Sequence[float],
    n_reps: int = WOLF_DEFAULT_REPS,
    seed: int = 0,
    draws_cap: int = DEFAULT_DRAWS_CAP,
) -> WolfSimulationCache:
    """Simulate next-year abundances once and tabulate threshold risks.

    Draw n uses the n-th child stream of the seed, and the same replicate
    noise is applied to every harvest level (common random numbers), so risk
    is non-decreasing in harvest for every single draw.
    """
    grid = _validate_harvest_grid(harvest_grid)
    thresholds = tuple(float(v) for v in n_min_values)
    if not thresholds or any(v <= 0 for v in thresholds):
        raise ValidationError("thresholds must be positive and non-empty")
    if n_reps < 1:
        raise ValidationError("n_reps must be a positive integer")

    growth, proc_sd, n_last = _wolf_draw_arrays(posterior, data, draws_cap)
    n = growth.size
    streams = np.random.SeedSequence(seed).spawn(n)
    z = np.empty((n, n_reps))
    for i in range(n):
        z[i] = np.random.Generator(np.random.PCG64(streams[i])).standard_normal(n_reps)

    noise = np.exp(proc_sd[:, None] * z)
    risk = np.empty((grid.size, len(thresholds), n))
    for a_i, a in enumerate(grid):
        survivors = n_last - float(a)
        outcomes = np.where(
            survivors[:, None] > 0,
            (growth * survivors)[:, None] * noise,
            0.0,
        )
        for m_i, n_min in enumerate(thresholds):
            risk[a_i, m_i] = (outcomes < n_min).mean(axis=1)

    return WolfSimulationCache(
        harvest_grid=tuple(int(a) for a in grid),
        n_min_values=thresholds,
        risk=risk,
        n_draws=n,
        n_reps=n_reps,
        seed=seed,
    )


def default_harvest_grid(posterior: PosteriorSample, data: wf.WolfDataset, step: int = 1):
    """Integer harvests from 0 to half the posterior-median current abundance."""
    n_last = posterior.column(f"N_{data.years[-1]}")
    top = int(np.floor(0.5 * float(np.median(n_last))))
    return list(range(0, top + 1, max(1, int(step))))


def wolf_eu_curve(
    posterior: PosteriorSample,
    data: wf.WolfDataset,
    prefs: wf.WolfPreferences,
    harvest_grid,
    n_reps: int = WOLF_DEFAULT_REPS,
    seed: int = 0,
    draws_cap: int = DEFAULT_DRAWS_CAP,
    cache: WolfSimulationCache | None = None,
) -> EUCurve:
    """Expected utility of each candidate harvest, scored on shared noise."""
    if cache is None:
        cache = build_wolf_cache(
            posterior, data, harvest_grid, [prefs.n_min], n_reps, seed, draws_cap
        )
    try:
        m_i = cache.n_min_values.index(float(prefs.n_min))
    except ValueError:
        raise ValidationError(
            f"cache does not cover threshold {prefs.n_min!r}"
        ) from None

    net = prefs.benefit - prefs.cost
    scores = []
    for a_i, a in enumerate(cache.harvest_grid):
        risks = cache.risk[a_i, m_i]
        mean_eu = net * a - prefs.risk_aversion * float(risks.mean())
        per_draw = net * a - prefs.risk_aversion * risks
        scores.append(ActionScore(action_id=a, estimate=_estimate(mean_eu, per_draw)))

    sel = select_optimal(scores)
    return EUCurve(
        actions=tuple(cache.harvest_grid),
        scores=tuple(s.estimate for s in scores),
        optimum_index=sel.best_index,
        ambiguous=sel.ambiguous,
        config=CurveConfig(n_draws=cache.n_draws, n_reps=cache.n_reps, seed=cache.seed),
    )


def wolf_survival_curve(cache: WolfSimulationCache, n_min: float) -> np.ndarray:
    """P(next abundance >= threshold) per harvest, pooled over draws."""
    m_i = cache.n_min_values.index(float(n_min))
    return 1.0 - cache.risk[:, m_i, :].mean(axis=1)


def wolf_sensitivity(
    posterior: PosteriorSample,
    data: wf.WolfDataset,
    benefit_values: Sequence[float],
    cost_values: Sequence[float],
    risk_aversion_values: Sequence[float],
    n_min_values: Sequence[float],
    harvest_grid,
    n_reps: int = WOLF_DEFAULT_REPS,
    seed: int = 0,
    draws_cap: int = DEFAULT_DRAWS_CAP,
    verify_cache: bool = False,
) -> SensitivityGrid:
    """Optimal harvest for every preference combination, from one cache."""
    for name, vals in (
        ("benefit", benefit_values), ("cost", cost_values),
        ("risk_aversion", risk_aversion_values), ("n_min", n_min_values),
    ):
        if len(list(vals)) == 0:
            raise ValidationError(f"{name} grid must be non-empty")

    cache = build_wolf_cache(
        posterior, data, harvest_grid, n_min_values, n_reps, seed, draws_cap
    )
    if verify_cache:
        again = build_wolf_cache(
            posterior, data, harvest_grid, n_min_values, n_reps, seed, draws_cap
        )
        if not np.array_equal(cache.risk, again.risk):
            raise BayesdecideError("simulation cache is not reproducible bitwise")

    grid = np.asarray(cache.harvest_grid, dtype=float)
    pooled = cache.pooled_risk()  # (n_actions, n_thresholds)
    cells = np.empty(
        (len(benefit_values), len(cost_values), len(risk_aversion_values), len(n_min_values)),
        dtype=np.int64,
    )
    for b_i, b in enumerate(benefit_values):
        for c_i, c in enumerate(cost_values):
            for r_i, alpha in enumerate(risk_aversion_values):
                for m_i in range(len(n_min_values)):
                    eu = (b - c) * grid - alpha * pooled[:, m_i]
                    cells[b_i, c_i, r_i, m_i] = cache.harvest_grid[int(np.argmax(eu))]

    return SensitivityGrid(
        axes=(
            ("benefit", tuple(float(v) for v in benefit_values)),
            ("cost", tuple(float(v) for v in cost_values)),
            ("risk_aversion", tuple(float(v) for v in risk_aversion_values)),
            ("n_min", tuple(float(v) for v in n_min_values)),
        ),
        cells=cells,
        cache_digest=cache.digest(),
        config=CurveConfig(n_draws=cache.n_draws, n_reps=cache.n_reps, seed=cache.seed),
    )


# ---------------------------------------------------------------------------
# Muskrat: effort allocation decisions


class MuskratSimulator:
    """Forward simulator with frozen uniforms for common-random-number scoring.

    The inverse-CDF uniforms for the catch and growth stages are generated
    once per (posterior draw, replicate, site) from the seed; scoring any
    allocation reuses them, so outcome differences across allocations are
    driven by the allocations alone.
    """

    def __init__(
        self,
        posterior: PosteriorSample,
        data: mk.MuskratDataset,
        n_reps: int = MUSKRAT_DEFAULT_REPS,
        seed: int = 0,
        draws_cap: int = DEFAULT_DRAWS_CAP,
    ):
        if n_reps < 1:
            raise ValidationError("n_reps must be a positive integer")
        self.data = data
        self.n_reps = n_reps
        self.seed = seed

        idx = _thin_indices(posterior.n_draws, draws_cap)
        self.intercept = posterior.column(mk.CAPTURE_INTERCEPT)[idx]
        self.slope = posterior.column(mk.CAPTURE_EFFORT_SLOPE)[idx]
        self.growth = posterior.column(mk.GROWTH_RATE)[idx]
        self.k_cap = posterior.column(mk.CARRYING_CAPACITY)[idx]
        self.nb_effect = posterior.column(mk.NEIGHBOR_EFFECT)[idx]
        last = data.n_seasons - 1
        self.n_last = np.column_stack(
            [posterior.column(f"N[{s.site_id},{last}]")[idx] for s in data.sites]
        )
        self.n_draws = self.intercept.size

        s = data.n_sites
        streams = np.random.SeedSequence(seed).spawn(self.n_draws)
        self.u_catch = np.empty((self.n_draws, n_reps, s))
        self.u_growth = np.empty((self.n_draws, n_reps, s))
        for i in range(self.n_draws):
            rng = np.random.Generator(np.random.PCG64(streams[i]))
            self.u_catch[i] = rng.random((n_reps, s))
            self.u_growth[i] = rng.random((n_reps, s))
        self.u_catch = np.clip(self.u_catch, 1e-15, 1.0 - 1e-16)
        self.u_growth = np.clip(self.u_growth, 1e-15, 1.0 - 1e-16)

        self.prov_index = data.province_index()
        self.weights = data.neighbor_weights()

    def mean_total_abundance(self, efforts_by_province) -> np.ndarray:
        """Per-draw replicate-mean of total next-season abundance."""
        efforts = mk._allocation_efforts(efforts_by_province, self.data.n_provinces)
        effort_site = efforts[self.prov_index]

        p = mk.capture_prob(
            effort_site[None, :], self.intercept[:, None], self.slope[:, None]
        )  # (n_draws, S)
        catches = binom_dist.ppf(self.u_catch, self.n_last[:, None, :], p[:, None, :])
        neighb = mk.neighbor_cpue(catches, effort_site[None, None, :], self.weights)
        mu = mk.process_mean(
            self.n_last[:, None, :],
            catches,
            self.growth[:, None, None],
            self.k_cap[:, None, None],
            self.nb_effect[:, None, None],
            neighb,
        )
        nxt = poisson_dist.ppf(self.u_growth, mu)
        return nxt.sum(axis=2).mean(axis=1)

    def score(self, efforts_by_province, prefs: mk.MuskratPreferences) -> MCEstimate:
        efforts = mk._allocation_efforts(efforts_by_province, self.data.n_provinces)
        per_draw_ab = self.mean_total_abundance(efforts)
        cost = prefs.effort_cost * float(efforts.sum())
        mean_eu = -cost - prefs.abundance_penalty * float(per_draw_ab.mean())
        per_draw = -cost - prefs.abundance_penalty * per_draw_ab
        return _estimate(mean_eu, per_draw)


def _validate_effort_grid(effort_grid) -> np.ndarray:
    grid = np.asarray(effort_grid, dtype=float)
    if grid.size == 0:
        raise ValidationError("effort grid must be non-empty")
    if np.any(~np.isfinite(grid)) or np.any(grid < 0):
        raise ValidationError("effort values must be finite and non-negative")
    return grid


def build_uniform_effort_cache(
    posterior: PosteriorSample,
    data: mk.MuskratDataset,
    effort_grid,
    n_reps: int = MUSKRAT_DEFAULT_REPS,
    seed: int = 0,
    draws_cap: int = DEFAULT_DRAWS_CAP,
) -> tuple[np.ndarray, MuskratSimulator]:
    """(n_efforts, n_draws) mean total abundances for uniform effort levels."""
    grid = _validate_effort_grid(effort_grid)
    sim = MuskratSimulator(posterior, data, n_reps, seed, draws_cap)
    cache = np.empty((grid.size, sim.n_draws))
    for e_i, e in enumerate(grid):
        cache[e_i] = sim.mean_total_abundance(np.full(data.n_provinces, float(e)))
    return cache, sim


def uniform_effort_curve(
    posterior: PosteriorSample,
    data: mk.MuskratDataset,
    prefs: mk.MuskratPreferences,
    effort_grid,
    n_reps: int = MUSKRAT_DEFAULT_REPS,
    seed: int = 0,
    draws_cap: int = DEFAULT_DRAWS_CAP,
    cache: np.ndarray | None = None,
    sim: MuskratSimulator | None = None,
) -> EUCurve:
    """Expected utility of applying the same effort in every province."""
    grid = _validate_effort_grid(effort_grid)
    if cache is None or sim is None:
        cache, sim = build_uniform_effort_cache(
            posterior, data, effort_grid, n_reps, seed, draws_cap
        )

    n_prov = data.n_provinces
    scores = []
    for e_i, e in enumerate(grid):
        cost = prefs.effort_cost * n_prov * float(e)
        per_draw_ab = cache[e_i]
        mean_eu = -cost - prefs.abundance_penalty * float(per_draw_ab.mean())
        per_draw = -cost - prefs.abundance_penalty * per_draw_ab
        scores.append(ActionScore(action_id=float(e), estimate=_estimate(mean_eu, per_draw)))

    sel = select_optimal(scores)
    return EUCurve(
        actions=tuple(float(e) for e in grid),
        scores=tuple(s.estimate for s in scores),
        optimum_index=sel.best_index,
        ambiguous=sel.ambiguous,
        config=CurveConfig(n_draws=sim.n_draws, n_reps=sim.n_reps, seed=sim.seed),
    )


def muskrat_sensitivity(
    posterior: PosteriorSample,
    data: mk.MuskratDataset,
    effort_cost_values: Sequence[float],
    abundance_penalty_values: Sequence[float],
    effort_grid,
    n_reps: int = MUSKRAT_DEFAULT_REPS,
    seed: int = 0,
    draws_cap: int = DEFAULT_DRAWS_CAP,
    verify_cache: bool = False,
) -> SensitivityGrid:
    """Optimal uniform effort per (cost, penalty) combination, one cache."""
    if len(list(effort_cost_values)) == 0 or len(list(abundance_penalty_values)) == 0:
        raise ValidationError("preference grids must be non-empty")
    grid = _validate_effort_grid(effort_grid)

    cache, sim = build_uniform_effort_cache(
        posterior, data, effort_grid, n_reps, seed, draws_cap
    )
    if verify_cache:
        again, _ = build_uniform_effort_cache(
            posterior, data, effort_grid, n_reps, seed, draws_cap
        )
        if not np.array_equal(cache, again):
            raise BayesdecideError("simulation cache is not reproducible bitwise")

    pooled = cache.mean(axis=1)  # (n_efforts,)
    total_effort = data.n_provinces * grid
    cells = np.empty((len(effort_cost_values), len(abundance_penalty_values)))
    for c_i, c in enumerate(effort_cost_values):
        for g_i, g in enumerate(abundance_penalty_values):
            eu = -c * total_effort - g * pooled
            cells[c_i, g_i] = grid[int(np.argmax(eu))]

    return SensitivityGrid(
        axes=(
            ("effort_cost", tuple(float(v) for v in effort_cost_values)),
            ("abundance_penalty", tuple(float(v) for v in abundance_penalty_values)),
        ),
        cells=cells,
        cache_digest=_digest(cache),
        config=CurveConfig(n_draws=sim.n_draws, n_reps=sim.n_reps, seed=sim.seed),
    )


def allocate_budget(
    posterior: PosteriorSample,
    data: mk.MuskratDataset,
    prefs: mk.MuskratPreferences,
    budget: float,
    n_candidates: int = 500,
    refine_rounds: int = 10,
    n_reps: int = MUSKRAT_DEFAULT_REPS,
    seed: int = 0,
    draws_cap: int = DEFAULT_DRAWS_CAP,
) -> BudgetAllocationResult:
    """Search the budget simplex for the best per-province effort split.

    Candidates are the uniform allocation, the single-province vertices, and
    flat-Dirichlet samples scaled to the budget; all share one noise stream.
    The best candidate is then refined by greedy pairwise transfers of
    budget/50 between provinces while the paired expected utility improves.
    """
    if not (budget > 0):
        raise ValidationError("budget must be > 0")
    n_prov = data.n_provinces
    if n_candidates < n_prov + 2:
        raise ValidationError(
            f"n_candidates must be at least n_provinces + 2 = {n_prov + 2}"
        )

    sim_seq, cand_seq = np.random.SeedSequence(seed).spawn(2)
    sim = MuskratSimulator(
        posterior, data, n_reps, seed=_seq_to_seed(sim_seq), draws_cap=draws_cap
    )

    cand_rng = np.random.Generator(np.random.PCG64(cand_seq))
    candidates = [np.full(n_prov, budget / n_prov)]
    candidates.extend(budget * np.eye(n_prov))
    n_dirichlet = n_candidates - n_prov - 1
    weights = cand_rng.dirichlet(np.ones(n_prov), size=n_dirichlet)
    candidates.extend(budget * w for w in weights)

    scores = [
        ActionScore(
            action_id=mk.Allocation(tuple(c), budget), estimate=sim.score(c, prefs)
        )
        for c in candidates
    ]
    sel = select_optimal(scores)
    curve = EUCurve(
        actions=tuple(s.action_id for s in scores),
        scores=tuple(s.estimate for s in scores),
        optimum_index=sel.best_index,
        ambiguous=sel.ambiguous,
        config=CurveConfig(n_draws=sim.n_draws, n_reps=sim.n_reps, seed=seed),
    )

    incumbent = np.array(candidates[sel.best_index], dtype=float)
    incumbent_score = scores[sel.best_index].estimate
    step = budget / 50.0
    moves = 0
    for _ in range(refine_rounds):
        best_gain = 0.0
        best_move = None
        for i in range(n_prov):
            if incumbent[i] < step:
                continue
            for j in range(n_prov):
                if i == j:
                    continue
                trial = incumbent.copy()
                trial[i] -= step
                trial[j] += step
                trial_score = sim.score(trial, prefs)
                gain = trial_score.mean - incumbent_score.mean
                if gain > best_gain:
                    best_gain = gain
                    best_move = (trial, trial_score)
        if best_move is None:
            break
        incumbent, incumbent_score = best_move
        moves += 1

    best = mk.Allocation(tuple(incumbent), budget)
    return BudgetAllocationResult(
        best=best, best_score=incumbent_score, candidates=curve, refine_steps=moves
    )


def allocation_share_profile(
    posterior: PosteriorSample,
    data: mk.MuskratDataset,
    prefs: mk.MuskratPreferences,
    budgets: Sequence[float],
    n_candidates: int = 500,
    refine_rounds: int = 10,
    n_reps: int = MUSKRAT_DEFAULT_REPS,
    seed: int = 0,
    draws_cap: int = DEFAULT_DRAWS_CAP,
) -> AllocationShareProfile:
    """Optimal effort shares per province as the total budget grows."""
    budgets = [float(b) for b in budgets]
    if not budgets or any(b <= 0 for b in budgets):
        raise ValidationError("budgets must be positive")
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ValidationError("budgets must be strictly increasing")

    seeds = np.random.SeedSequence(seed).generate_state(len(budgets), dtype=np.uint64)
    shares = np.empty((len(budgets), data.n_provinces))
    for b_i, budget in enumerate(budgets):
        result = allocate_budget(
            posterior, data, prefs, budget,
            n_candidates=n_candidates, refine_rounds=refine_rounds,
            n_reps=n_reps, seed=int(seeds[b_i]), draws_cap=draws_cap,
        )
        shares[b_i] = np.asarray(result.best.effort_by_province) / budget

    return AllocationShareProfile(
        budgets=tuple(budgets), provinces=data.provinces, shares=shares
    )


def _seq_to_seed(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint64)[0])
