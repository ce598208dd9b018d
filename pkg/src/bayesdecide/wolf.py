"""State-space model for an annually censused harvested population.

Observations are abundance estimates with multiplicative (log-scale) noise
whose standard deviation comes from reported 95% confidence intervals. The
latent population grows by a stochastic multiplicative rate applied to the
survivors of each year's removals. Forward simulation propagates one step
ahead under a candidate harvest, and the utility trades the net benefit of
removals against the risk of falling below a critical population threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .mcmc import ChainConfig, ParameterSpec, PosteriorSample, Support, run_mcmc

LOG_2PI = math.log(2.0 * math.pi)

# Likelihood floor for observation sd, so zero-width intervals stay computable.
SIGMA_OBS_FLOOR = 1e-6

GROWTH_RATE = "growth_rate"
PROCESS_SD = "process_sd"


@dataclass(frozen=True)
class WolfDataset:
    """Annual abundance estimates with 95% CI bounds and realized removals."""

    years: tuple[int, ...]
    n_hat: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    harvest: np.ndarray

    def __init__(self, years, n_hat, ci_low, ci_high, harvest):
        years = tuple(int(y) for y in years)
        n_hat = np.asarray(n_hat, dtype=float).copy()
        ci_low = np.asarray(ci_low, dtype=float).copy()
        ci_high = np.asarray(ci_high, dtype=float).copy()
        harvest = np.asarray(harvest, dtype=float).copy()

        t = len(years)
        if t == 0:
            raise ValidationError("dataset must contain at least one year")
        for name, arr in (
            ("n_hat", n_hat), ("ci_low", ci_low), ("ci_high", ci_high), ("harvest", harvest)
        ):
            if arr.shape != (t,):
                raise ValidationError(f"{name} has length {arr.shape}, expected {t} entries")
            if np.any(~np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite values")
        if any(b - a != 1 for a, b in zip(years, years[1:])):
            raise ValidationError("years must be strictly increasing by 1")
        if np.any(ci_low <= 0):
            raise ValidationError("ci_low must be positive everywhere")
        if np.any(ci_low > n_hat) or np.any(n_hat > ci_high):
            bad = int(np.flatnonzero((ci_low > n_hat) | (n_hat > ci_high))[0])
            raise ValidationError(
                f"year {years[bad]}: require ci_low <= n_hat <= ci_high, got "
                f"({ci_low[bad]}, {n_hat[bad]}, {ci_high[bad]})"
            )
        if np.any(harvest < 0) or np.any(harvest != np.round(harvest)):
            raise ValidationError("harvest must be non-negative integers")
        if np.any(harvest >= ci_high):
            bad = int(np.flatnonzero(harvest >= ci_high)[0])
            raise ValidationError(
                f"year {years[bad]}: harvest {harvest[bad]:g} is not below the "
                f"upper CI bound {ci_high[bad]:g}"
            )

        for arr in (n_hat, ci_low, ci_high, harvest):
            arr.setflags(write=False)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "n_hat", n_hat)
        object.__setattr__(self, "ci_low", ci_low)
        object.__setattr__(self, "ci_high", ci_high)
        object.__setattr__(self, "harvest", harvest)

    @property
    def n_years(self) -> int:
        return len(self.years)

    def latent_names(self) -> list[str]:
        return [f"N_{y}" for y in self.years]


@dataclass(frozen=True)
class WolfDraw:
    """One posterior draw: growth rate, process sd, and the latent abundances."""

    growth_rate: float
    process_sd: float
    n_latent: np.ndarray

    def __post_init__(self):
        ok = (
            math.isfinite(self.growth_rate)
            and self.growth_rate > 0
            and math.isfinite(self.process_sd)
            and self.process_sd > 0
        )
        latent = np.asarray(self.n_latent, dtype=float)
        if not ok or np.any(~np.isfinite(latent)) or np.any(latent <= 0):
            raise ValidationError("draw components must be finite and positive")
        object.__setattr__(self, "n_latent", latent)


@dataclass(frozen=True)
class WolfPreferences:
    """Utility weights: per-removal benefit and cost, risk aversion, threshold."""

    benefit: float
    cost: float
    risk_aversion: float
    n_min: float

    def __post_init__(self):
        if not (self.risk_aversion >= 0):
            raise ValidationError("risk_aversion must be >= 0")
        if not (self.n_min > 0):
            raise ValidationError("n_min must be > 0")


def sigma_obs_from_ci(ci_low: float, ci_high: float) -> float:
    """Log-scale observation sd implied by a 95% interval: log(hi/lo) / (2*1.96)."""
    if not (0 < ci_low <= ci_high):
        raise ValidationError(
            f"need 0 < ci_low <= ci_high, got ({ci_low!r}, {ci_high!r})"
        )
    return (math.log(ci_high) - math.log(ci_low)) / (2.0 * 1.96)


class WolfLogPosterior:
    """Unnormalized log posterior over (growth_rate, process_sd, N_1..N_T).

    Observation terms are normal log-densities of log(n_hat_t) around
    log(N_t) with the CI-derived sd; process terms are normal log-densities
    of log(N_t) around log(growth_rate * (N_{t-1} - harvest_{t-1})). States
    with no survivors (N_t <= harvest_t for t < T) score -inf rather than
    raising, so the sampler can reject them.

    Priors: growth_rate ~ LogNormal(0, 0.5), process_sd ~ HalfNormal(0.5),
    N_1 ~ LogNormal(log(n_hat_1), 1).
    """

    def __init__(self, data: WolfDataset):
        self.data = data
        self.log_n_hat = np.log(data.n_hat)
        self.sigma_obs = np.maximum(
            np.array([sigma_obs_from_ci(lo, hi) for lo, hi in zip(data.ci_low, data.ci_high)]),
            SIGMA_OBS_FLOOR,
        )
        self.harvest = data.harvest

    def __call__(self, theta: np.ndarray) -> float:
        growth = theta[0]
        proc_sd = theta[1]
        latent = theta[2:]
        if growth <= 0 or proc_sd <= 0 or np.any(latent <= 0):
            return -math.inf

        survivors = latent[:-1] - self.harvest[:-1]
        if survivors.size and np.any(survivors <= 0):
            return -math.inf

        log_latent = np.log(latent)
        resid_obs = (self.log_n_hat - log_latent) / self.sigma_obs
        lp = float(
            -0.5 * np.dot(resid_obs, resid_obs)
            - np.log(self.sigma_obs).sum()
            - 0.5 * LOG_2PI * latent.size
        )

        if survivors.size:
            mean_log = math.log(growth) + np.log(survivors)
            resid_proc = (log_latent[1:] - mean_log) / proc_sd
            lp += float(
                -0.5 * np.dot(resid_proc, resid_proc)
                - survivors.size * (math.log(proc_sd) + 0.5 * LOG_2PI)
            )

        lp += self._log_prior(growth, proc_sd, latent[0])
        return lp

    def _log_prior(self, growth: float, proc_sd: float, n_first: float) -> float:
        log_g = math.log(growth)
        lp = -log_g - math.log(0.5) - 0.5 * LOG_2PI - log_g * log_g / (2.0 * 0.25)
        lp += 0.5 * math.log(2.0 / math.pi) - math.log(0.5) - proc_sd * proc_sd / (2.0 * 0.25)
        d = math.log(n_first) - self.log_n_hat[0]
        lp += -math.log(n_first) - 0.5 * LOG_2PI - d * d / 2.0
        return lp


def wolf_log_posterior(draw: WolfDraw, data: WolfDataset) -> float:
    """Log posterior of one draw; -inf when removals exhaust the population."""
    if len(draw.n_latent) != data.n_years:
        raise ValidationError(
            f"draw has {len(draw.n_latent)} latent abundances for "
            f"{data.n_years} years of data (length mismatch)"
        )
    theta = np.concatenate([[draw.growth_rate, draw.process_sd], draw.n_latent])
    return WolfLogPosterior(data)(theta)


def wolf_parameter_specs(data: WolfDataset) -> list[ParameterSpec]:
    """Sampler specs: growth rate and process sd plus one latent N per year."""
    ratios = data.n_hat[1:] / np.maximum(data.n_hat[:-1] - data.harvest[:-1], 1.0)
    if ratios.size:
        growth0 = float(np.clip(np.exp(np.mean(np.log(np.clip(ratios, 0.1, 10.0)))), 0.5, 3.0))
    else:
        growth0 = 1.0
    specs = [
        ParameterSpec(GROWTH_RATE, Support.positive(), growth0, proposal_scale=0.05),
        ParameterSpec(PROCESS_SD, Support.positive(), 0.1, proposal_scale=0.5),
    ]
    sigma_obs = np.maximum(
        np.array([sigma_obs_from_ci(lo, hi) for lo, hi in zip(data.ci_low, data.ci_high)]),
        SIGMA_OBS_FLOOR,
    )
    for name, n0, s in zip(data.latent_names(), data.n_hat, sigma_obs):
        specs.append(
            ParameterSpec(
                name, Support.positive(), float(n0),
                proposal_scale=float(np.clip(s, 0.02, 0.5)),
            )
        )
    return specs


def default_wolf_config(seed: int = 0) -> ChainConfig:
    return ChainConfig(n_iterations=20_000, n_burnin=2_000, n_chains=2, seed=seed)


def fit_wolf(data: WolfDataset, config: ChainConfig | None = None) -> PosteriorSample:
    """Fit the harvested-population state-space model by adaptive MCMC."""
    if config is None:
        config = default_wolf_config()
    return run_mcmc(WolfLogPosterior(data), wolf_parameter_specs(data), config)


def simulate_wolf_forward(
    growth_rate: float,
    process_sd: float,
    n_current: float,
    harvest: int,
    n_reps: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Simulate next-year abundance replicates under a candidate harvest.

    Each replicate is lognormal around growth_rate * (n_current - harvest).
    A harvest at or above the current population yields 0 for every
    replicate: overharvest is a scored outcome, not an error.
    """
    if n_reps < 1:
        raise ValidationError("n_reps must be a positive integer")
    if harvest < 0:
        raise ValidationError("harvest must be non-negative")
    if harvest >= n_current:
        return np.zeros(n_reps)
    mean = growth_rate * (n_current - harvest)
    return mean * np.exp(process_sd * rng.standard_normal(n_reps))


def wolf_risk(samples, n_min: float) -> float:
    """Fraction of simulated abundances strictly below the threshold."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValidationError("samples must be non-empty")
    return float(np.mean(arr < n_min))


def wolf_utility(harvest: int, risk: float, prefs: WolfPreferences) -> float:
    """Net benefit of removals minus the weighted threshold risk."""
    if not (0.0 <= risk <= 1.0):
        raise ValidationError(f"risk must lie in [0, 1], got {risk!r}")
    return (prefs.benefit - prefs.cost) * harvest - prefs.risk_aversion * risk
