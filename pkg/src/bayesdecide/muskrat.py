"""Spatial removal model for an invasive population under trapping control.

Catches at each site are binomial draws from the latent abundance, with a
capture probability that increases with province-level trapping effort
through a complementary log-log link. Survivors grow by a density-dependent
Poisson process boosted by the catch-per-unit-effort of the eight
neighboring grid cells. Forward simulation propagates one season ahead under
a candidate effort allocation, and the utility trades total effort cost
against residual abundance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom as binom_dist
from scipy.stats import poisson as poisson_dist

from .errors import ValidationError
from .mcmc import ChainConfig, ParameterSpec, PosteriorSample, Support, run_mcmc

LOG_2PI = math.log(2.0 * math.pi)

CAPTURE_PROB_EPS = 1e-12

# Stand-in for zero survivors inside the growth equation: empty cells can
# still be recolonized through the neighborhood term.
RECOLONIZATION_FLOOR = 0.5

CAPTURE_INTERCEPT = "capture_intercept"
CAPTURE_EFFORT_SLOPE = "capture_effort_slope"
GROWTH_RATE = "growth_rate"
CARRYING_CAPACITY = "carrying_capacity"
NEIGHBOR_EFFECT = "neighbor_effect"

STRUCTURAL_NAMES = (
    CAPTURE_INTERCEPT,
    CAPTURE_EFFORT_SLOPE,
    GROWTH_RATE,
    CARRYING_CAPACITY,
    NEIGHBOR_EFFECT,
)


@dataclass(frozen=True)
class Site:
    site_id: str
    province_id: str
    grid_x: int
    grid_y: int


@dataclass(frozen=True)
class MuskratDataset:
    """Site-by-season catch grid with province-level effort and 8-neighborhoods."""

    sites: tuple[Site, ...]
    provinces: tuple[str, ...]
    n_seasons: int
    catch: np.ndarray
    effort_prov: np.ndarray
    adjacency: tuple[tuple[int, ...], ...]

    def __init__(self, sites, provinces, n_seasons, catch, effort_prov, adjacency):
        sites = tuple(sites)
        provinces = tuple(str(p) for p in provinces)
        n_seasons = int(n_seasons)
        catch = np.asarray(catch, dtype=float).copy()
        effort_prov = np.asarray(effort_prov, dtype=float).copy()
        adjacency = tuple(tuple(int(j) for j in nb) for nb in adjacency)

        s = len(sites)
        if s == 0 or n_seasons < 1:
            raise ValidationError("dataset needs at least one site and one season")
        if len(set(provinces)) != len(provinces):
            raise ValidationError("province ids must be unique")
        known = set(provinces)
        for site in sites:
            if site.province_id not in known:
                raise ValidationError(
                    f"site {site.site_id!r} references unknown province {site.province_id!r}"
                )
        if catch.shape != (s, n_seasons):
            raise ValidationError(
                f"catch has shape {catch.shape}, expected ({s}, {n_seasons})"
            )
        if effort_prov.shape != (len(provinces), n_seasons):
            raise ValidationError(
                f"effort_prov has shape {effort_prov.shape}, expected "
                f"({len(provinces)}, {n_seasons})"
            )
        if np.any(~np.isfinite(catch)) or np.any(catch < 0) or np.any(catch != np.round(catch)):
            raise ValidationError("catch values must be finite non-negative integers")
        if np.any(~np.isfinite(effort_prov)) or np.any(effort_prov < 0):
            raise ValidationError("effort values must be finite and non-negative")
        if len(adjacency) != s:
            raise ValidationError("adjacency must list neighbors for every site")
        for i, nb in enumerate(adjacency):
            if len(nb) > 8:
                raise ValidationError(f"site index {i} has more than 8 neighbors")
            for j in nb:
                if not (0 <= j < s) or j == i:
                    raise ValidationError(f"site index {i} has invalid neighbor index {j}")
                if i not in adjacency[j]:
                    raise ValidationError(
                        f"adjacency is not symmetric between site indices {i} and {j}"
                    )

        catch.setflags(write=False)
        effort_prov.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "provinces", provinces)
        object.__setattr__(self, "n_seasons", n_seasons)
        object.__setattr__(self, "catch", catch)
        object.__setattr__(self, "effort_prov", effort_prov)
        object.__setattr__(self, "adjacency", adjacency)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_provinces(self) -> int:
        return len(self.provinces)

    def province_index(self) -> np.ndarray:
        """Province row index of every site, aligned with ``sites``."""
        lookup = {p: i for i, p in enumerate(self.provinces)}
        return np.array([lookup[s.province_id] for s in self.sites], dtype=np.int64)

    def effort_by_site(self) -> np.ndarray:
        """Province effort broadcast to (n_sites, n_seasons)."""
        return self.effort_prov[self.province_index(), :]

    def isolated_sites(self) -> tuple[int, ...]:
        return tuple(i for i, nb in enumerate(self.adjacency) if not nb)

    def neighbor_weights(self) -> np.ndarray:
        """(S, S) matrix averaging over each site's neighbors (rows of zeros
        for isolated sites)."""
        s = self.n_sites
        w = np.zeros((s, s))
        for i, nb in enumerate(self.adjacency):
            if nb:
                w[i, list(nb)] = 1.0 / len(nb)
        return w

    def latent_names(self) -> list[str]:
        return [
            f"N[{site.site_id},{t}]"
            for site in self.sites
            for t in range(self.n_seasons)
        ]


@dataclass(frozen=True)
class MuskratDraw:
    """One posterior draw of the structural parameters and the latent grid."""

    capture_intercept: float
    capture_effort_slope: float
    growth_rate: float
    carrying_capacity: float
    neighbor_effect: float
    n_latent: np.ndarray

    def __post_init__(self):
        latent = np.asarray(self.n_latent, dtype=float)
        if latent.ndim != 2:
            raise ValidationError("n_latent must be a (site x season) matrix")
        if np.any(~np.isfinite(latent)) or np.any(latent < 0) or np.any(latent != np.round(latent)):
            raise ValidationError("latent abundances must be non-negative integers")
        if not (self.carrying_capacity > 0):
            raise ValidationError("carrying_capacity must be > 0")
        object.__setattr__(self, "n_latent", latent)


@dataclass(frozen=True)
class Allocation:
    """Per-province trapping efforts constrained by a total budget."""

    effort_by_province: tuple[float, ...]
    budget: float

    def __init__(self, effort_by_province, budget):
        efforts = tuple(float(a) for a in effort_by_province)
        budget = float(budget)
        if not (budget > 0):
            raise ValidationError("budget must be > 0")
        if any(a < 0 for a in efforts):
            raise ValidationError("province efforts must be non-negative")
        total = sum(efforts)
        if total > budget * (1.0 + 1e-9):
            raise ValidationError(f"total effort {total!r} exceeds budget {budget!r}")
        object.__setattr__(self, "effort_by_province", efforts)
        object.__setattr__(self, "budget", budget)

    @property
    def total(self) -> float:
        return float(sum(self.effort_by_province))

    def shares(self) -> tuple[float, ...]:
        return tuple(a / self.budget for a in self.effort_by_province)


@dataclass(frozen=True)
class MuskratPreferences:
    """Utility weights: cost per unit effort and penalty on residual abundance."""

    effort_cost: float
    abundance_penalty: float

    def __post_init__(self):
        if not (self.effort_cost >= 0 and self.abundance_penalty >= 0):
            raise ValidationError("effort_cost and abundance_penalty must be >= 0")


def capture_prob(effort, intercept: float, effort_slope: float):
    """Capture probability under the cloglog link on log(effort + 1).

    Returns 1 - exp(-exp(intercept + effort_slope * log(effort + 1))),
    clamped to [1e-12, 1 - 1e-12]. Accepts scalars or arrays.
    """
    eff = np.asarray(effort, dtype=float)
    if np.any(eff < 0):
        raise ValidationError("effort must be non-negative")
    eta = intercept + effort_slope * np.log1p(eff)
    p = -np.expm1(-np.exp(eta))
    p = np.clip(p, CAPTURE_PROB_EPS, 1.0 - CAPTURE_PROB_EPS)
    return float(p) if np.isscalar(effort) else p


def neighbor_cpue(catches: np.ndarray, efforts: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Average catch per unit (effort + 1) over each site's neighbors.

    ``catches`` and ``efforts`` have sites on the last axis; ``weights`` is
    the (S, S) neighbor-averaging matrix. Isolated sites get 0.
    """
    cpue = catches / (efforts + 1.0)
    return cpue @ weights.T


def neighbor_covariate(data: MuskratDataset, site: int, season: int) -> float:
    """Observed-data connectivity covariate for one site and season."""
    if not (0 <= site < data.n_sites) or not (0 <= season < data.n_seasons):
        raise ValidationError("site or season index out of range")
    nb = data.adjacency[site]
    if not nb:
        return 0.0
    effort = data.effort_by_site()
    vals = [data.catch[j, season] / (effort[j, season] + 1.0) for j in nb]
    return float(np.mean(vals))


def process_mean(n_before, removed, growth_rate, carrying_capacity, neighbor_effect, neighb):
    """Expected next abundance shared by the likelihood and the simulator.

    survivors * exp(growth_rate * (1 - n_before / carrying_capacity)
    + neighbor_effect * neighb); when nothing survives, the recolonization
    floor replaces the survivor count and the density term drops out.
    """
    n_before = np.asarray(n_before, dtype=float)
    survivors = n_before - np.asarray(removed, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        boost = np.exp(neighbor_effect * np.asarray(neighb, dtype=float))
        grown = survivors * np.exp(growth_rate * (1.0 - n_before / carrying_capacity)) * boost
        return np.where(survivors > 0, grown, RECOLONIZATION_FLOOR * boost)


class MuskratLogPosterior:
    """Unnormalized log posterior over the structural parameters and latents.

    Binomial catch terms use the effort-dependent capture probability;
    Poisson transition terms use :func:`process_mean` with the observed-data
    neighborhood covariate. Latent states below the observed catch score
    -inf. Priors: intercept ~ N(-4, 2), effort slope ~ N(0, 1), growth ~
    N(0, 1), carrying capacity ~ LogNormal(log 150, 1), neighbor effect ~
    N(0, 1).

    Instances memoize capture probabilities on the (intercept, slope) pair
    and tabulate log-factorials, since the sampler updates one coordinate at
    a time. Not thread-safe; give each thread its own instance.
    """

    def __init__(self, data: MuskratDataset):
        self.data = data
        self.y = data.catch
        self.y_int = data.catch.astype(np.int64)
        effort = data.effort_by_site()
        self.log_eff1 = np.log1p(effort)
        self.neighb_obs = neighbor_cpue(self.y.T, effort.T, data.neighbor_weights()).T
        self.n_sites = data.n_sites
        self.n_seasons = data.n_seasons

        self._lgamma_table = gammaln(np.arange(1, 4097, dtype=float))
        self._p_key = (math.nan, math.nan)
        self._log_p = np.empty(0)
        self._log_1mp = np.empty(0)
        self._obs_const = 0.0

    def _log_factorial(self, n: np.ndarray) -> np.ndarray:
        """gammaln(n + 1) for a non-negative integer-valued array, via table."""
        top = int(n.max()) if n.size else 0
        if top >= self._lgamma_table.size:
            self._lgamma_table = gammaln(np.arange(1, 2 * top + 2, dtype=float))
        return self._lgamma_table[n]

    def _capture_terms(self, intercept: float, slope: float):
        if (intercept, slope) != self._p_key:
            with np.errstate(over="ignore"):
                eta = intercept + slope * self.log_eff1
                p = np.clip(
                    -np.expm1(-np.exp(eta)), CAPTURE_PROB_EPS, 1.0 - CAPTURE_PROB_EPS
                )
            self._log_p = np.log(p)
            self._log_1mp = np.log1p(-p)
            # terms that depend only on p and the observed catches
            self._obs_const = float(
                np.sum(self.y * self._log_p)
                - np.sum(self.y * self._log_1mp)
                - self._log_factorial(self.y_int).sum()
            )
            self._p_key = (intercept, slope)
        return self._log_1mp, self._obs_const

    def __call__(self, theta: np.ndarray) -> float:
        intercept, slope, growth, k_cap, nb_effect = theta[:5]
        latent = theta[5:].reshape(self.n_sites, self.n_seasons)
        if k_cap <= 0 or np.any(latent < self.y):
            return -math.inf

        n_int = latent.astype(np.int64)
        log_1mp, obs_const = self._capture_terms(intercept, slope)
        lp = obs_const + float(
            self._log_factorial(n_int).sum()
            - self._log_factorial(n_int - self.y_int).sum()
            + np.dot(latent.ravel(), log_1mp.ravel())
        )

        if self.n_seasons > 1:
            mu = process_mean(
                latent[:, :-1], self.y[:, :-1], growth, k_cap, nb_effect,
                self.neighb_obs[:, :-1],
            )
            if not np.all(np.isfinite(mu)):
                return -math.inf
            nxt = latent[:, 1:]
            lp += float(
                np.dot(nxt.ravel(), np.log(mu).ravel())
                - mu.sum()
                - self._log_factorial(n_int[:, 1:]).sum()
            )

        lp += self._log_prior(intercept, slope, growth, k_cap, nb_effect)
        return lp

    @staticmethod
    def _log_prior(intercept, slope, growth, k_cap, nb_effect) -> float:
        lp = -0.5 * ((intercept + 4.0) / 2.0) ** 2 - math.log(2.0) - 0.5 * LOG_2PI
        lp += -0.5 * slope * slope - 0.5 * LOG_2PI
        lp += -0.5 * growth * growth - 0.5 * LOG_2PI
        log_k = math.log(k_cap)
        d = log_k - math.log(150.0)
        lp += -log_k - 0.5 * d * d - 0.5 * LOG_2PI
        lp += -0.5 * nb_effect * nb_effect - 0.5 * LOG_2PI
        return lp


def muskrat_log_posterior(draw: MuskratDraw, data: MuskratDataset) -> float:
    """Log posterior of one draw; -inf when any latent state is below its catch."""
    if draw.n_latent.shape != (data.n_sites, data.n_seasons):
        raise ValidationError(
            f"draw latent grid has shape {draw.n_latent.shape}, data needs "
            f"({data.n_sites}, {data.n_seasons})"
        )
    theta = np.concatenate(
        [
            [
                draw.capture_intercept,
                draw.capture_effort_slope,
                draw.growth_rate,
                draw.carrying_capacity,
                draw.neighbor_effect,
            ],
            draw.n_latent.ravel(),
        ]
    )
    return MuskratLogPosterior(data)(theta)


def muskrat_parameter_specs(data: MuskratDataset) -> list[ParameterSpec]:
    """Sampler specs: five structural parameters plus one latent N per cell."""
    specs = [
        ParameterSpec(CAPTURE_INTERCEPT, Support.real(), -4.0, proposal_scale=0.3),
        ParameterSpec(CAPTURE_EFFORT_SLOPE, Support.real(), 0.0, proposal_scale=0.2),
        ParameterSpec(GROWTH_RATE, Support.real(), 0.3, proposal_scale=0.2),
        ParameterSpec(CARRYING_CAPACITY, Support.positive(), 150.0, proposal_scale=0.3),
        ParameterSpec(NEIGHBOR_EFFECT, Support.real(), 0.0, proposal_scale=0.2),
    ]
    y = data.catch
    inits = y + np.maximum(5.0, 2.0 * y)
    for name, n0 in zip(data.latent_names(), inits.ravel()):
        specs.append(
            ParameterSpec(name, Support.positive_integer(), float(np.round(n0)), proposal_scale=4.0)
        )
    return specs


def default_muskrat_config(seed: int = 0) -> ChainConfig:
    return ChainConfig(n_iterations=30_000, n_burnin=10_000, n_chains=2, seed=seed)


def fit_muskrat(data: MuskratDataset, config: ChainConfig | None = None) -> PosteriorSample:
    """Fit the spatial removal model by adaptive MCMC."""
    if config is None:
        config = default_muskrat_config()
    return run_mcmc(MuskratLogPosterior(data), muskrat_parameter_specs(data), config)


def _clip_uniforms(u: np.ndarray) -> np.ndarray:
    # ppf(0) of a discrete distribution is -1; keep uniforms strictly inside (0, 1)
    return np.clip(u, 1e-15, 1.0 - 1e-16)


def _allocation_efforts(allocation, n_provinces: int) -> np.ndarray:
    if isinstance(allocation, Allocation):
        efforts = np.asarray(allocation.effort_by_province, dtype=float)
    else:
        efforts = np.asarray(allocation, dtype=float)
    if efforts.shape != (n_provinces,):
        raise ValidationError(
            f"allocation must list effort for each of {n_provinces} provinces"
        )
    if np.any(efforts < 0) or np.any(~np.isfinite(efforts)):
        raise ValidationError("province efforts must be finite and non-negative")
    return efforts


def simulate_muskrat_forward(
    draw: MuskratDraw,
    data: MuskratDataset,
    allocation,
    n_reps: int,
    rng: np.random.Generator,
    return_catches: bool = False,
    process_mean_only: bool = False,
):
    """Simulate next-season site abundances under an effort allocation.

    Per replicate: binomial catches at the allocated capture probability,
    then a Poisson transition whose mean couples survivors, density
    dependence, and the simulated neighborhood catch-per-unit-effort.
    Sampling inverts fixed uniform draws, so replicate r is coupled across
    allocations when callers reuse the same rng seed (common random
    numbers). ``process_mean_only`` returns the transition mean instead of
    the Poisson draw (a deterministic hook for cross-checks).
    """
    if n_reps < 1:
        raise ValidationError("n_reps must be a positive integer")
    efforts = _allocation_efforts(allocation, data.n_provinces)
    effort_site = efforts[data.province_index()]

    n_current = draw.n_latent[:, -1].astype(float)
    p_site = capture_prob(effort_site, draw.capture_intercept, draw.capture_effort_slope)

    u_catch = _clip_uniforms(rng.random((n_reps, data.n_sites)))
    u_growth = _clip_uniforms(rng.random((n_reps, data.n_sites)))

    catches = binom_dist.ppf(u_catch, n_current[None, :], p_site[None, :])
    neighb = neighbor_cpue(catches, effort_site[None, :], data.neighbor_weights())
    mu = process_mean(
        n_current[None, :], catches, draw.growth_rate, draw.carrying_capacity,
        draw.neighbor_effect, neighb,
    )
    if process_mean_only:
        nxt = mu
    else:
        nxt = poisson_dist.ppf(u_growth, mu)
    if return_catches:
        return nxt, catches
    return nxt


def muskrat_utility(allocation, n_next, prefs: MuskratPreferences) -> float:
    """Negative total effort cost minus the weighted residual abundance."""
    efforts = (
        np.asarray(allocation.effort_by_province, dtype=float)
        if isinstance(allocation, Allocation)
        else np.asarray(allocation, dtype=float)
    )
    n_next = np.asarray(n_next, dtype=float)
    return float(
        -prefs.effort_cost * efforts.sum() - prefs.abundance_penalty * n_next.sum()
    )
