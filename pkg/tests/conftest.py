import time

import numpy as np
import pytest

from bayesdecide.mcmc import ChainConfig
from bayesdecide.muskrat import STRUCTURAL_NAMES, fit_muskrat
from bayesdecide.synthetic import (
    point_mass_posterior,
    symmetric_muskrat_dataset,
    synthetic_muskrat_dataset,
    synthetic_wolf_dataset,
)
from bayesdecide.wolf import fit_wolf

WOLF_RECOVERY_SEED = 11
WOLF_CHAIN_SEED = 7
MUSKRAT_RECOVERY_SEED = 2
MUSKRAT_CHAIN_SEED = 3


@pytest.fixture(scope="session")
def wolf_recovery():
    """Paper-scale wolf fit on synthetic data; shared across the suite."""
    data, truth = synthetic_wolf_dataset(
        n_years=30, growth_rate=1.15, process_sd=0.05, ci_halfwidth=0.15,
        seed=WOLF_RECOVERY_SEED,
    )
    config = ChainConfig(
        n_iterations=20_000, n_burnin=2_000, n_chains=2, seed=WOLF_CHAIN_SEED
    )
    start = time.perf_counter()
    sample = fit_wolf(data, config)
    elapsed = time.perf_counter() - start
    return data, truth, sample, elapsed


@pytest.fixture(scope="session")
def muskrat_recovery():
    """Paper-scale muskrat fit on a 3x3 synthetic grid; shared across the suite."""
    data, truth = synthetic_muskrat_dataset(seed=MUSKRAT_RECOVERY_SEED)
    config = ChainConfig(
        n_iterations=30_000, n_burnin=10_000, n_chains=2, seed=MUSKRAT_CHAIN_SEED
    )
    start = time.perf_counter()
    sample = fit_muskrat(data, config)
    elapsed = time.perf_counter() - start
    return data, truth, sample, elapsed


def wolf_point_mass(data, growth=1.1, proc_sd=0.1, n_last=1100.0, n_rows=2):
    names = ["growth_rate", "process_sd", f"N_{data.years[-1]}"]
    return point_mass_posterior(names, [growth, proc_sd, n_last], n_rows=n_rows)


def muskrat_point_mass(data, params, n_last, n_rows=2):
    last = data.n_seasons - 1
    names = list(STRUCTURAL_NAMES) + [f"N[{s.site_id},{last}]" for s in data.sites]
    values = [params[name] for name in STRUCTURAL_NAMES] + [float(v) for v in n_last]
    return point_mass_posterior(names, values, n_rows=n_rows)


@pytest.fixture(scope="session")
def symmetric_muskrat():
    """Four exchangeable provinces plus a symmetric point-mass posterior."""
    data, truth = symmetric_muskrat_dataset(
        n_provinces=4, sites_per_province=2, n_seasons=6, effort_level=80.0, seed=21
    )
    n_last = np.full(data.n_sites, 150.0)
    posterior = muskrat_point_mass(data, truth, n_last)
    return data, posterior
