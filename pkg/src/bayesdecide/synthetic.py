"""Synthetic dataset generators mirroring the production file schemas.

Desk-scale stand-ins for the national monitoring datasets: same shapes, same
ingestion schemas, generated from the same model equations the fitters
assume, so parameter recovery is well-posed.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .mcmc import ChainConfig, ParamDiagnostics, PosteriorSample
from .muskrat import MuskratDataset, Site, capture_prob, neighbor_cpue, process_mean
from .wolf import WolfDataset, sigma_obs_from_ci


def synthetic_wolf_dataset(
    n_years: int = 30,
    growth_rate: float = 1.15,
    process_sd: float = 0.05,
    ci_halfwidth: float = 0.15,
    initial_abundance: float = 400.0,
    harvest_fraction: float = 0.10,
    first_year: int = 1995,
    seed: int = 0,
) -> tuple[WolfDataset, dict]:
    """Generate an annual abundance series with removals and CI-noised estimates.

    Returns the dataset plus a dict with the true parameters and latent path.
    """
    if n_years < 1:
        raise ValidationError("n_years must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    sigma_obs = sigma_obs_from_ci(1.0 - ci_halfwidth, 1.0 + ci_halfwidth)

    n_true = np.empty(n_years)
    harvest = np.zeros(n_years)
    n_true[0] = initial_abundance
    for t in range(n_years - 1):
        harvest[t] = np.floor(harvest_fraction * n_true[t])
        survivors = max(n_true[t] - harvest[t], 1.0)
        n_true[t + 1] = growth_rate * survivors * math.exp(
            process_sd * rng.standard_normal()
        )
    harvest[-1] = np.floor(harvest_fraction * n_true[-1])

    n_hat = n_true * np.exp(sigma_obs * rng.standard_normal(n_years))
    data = WolfDataset(
        years=range(first_year, first_year + n_years),
        n_hat=n_hat,
        ci_low=n_hat * (1.0 - ci_halfwidth),
        ci_high=n_hat * (1.0 + ci_halfwidth),
        harvest=harvest,
    )
    truth = {
        "growth_rate": growth_rate,
        "process_sd": process_sd,
        "sigma_obs": sigma_obs,
        "n_true": n_true,
    }
    return data, truth


def synthetic_muskrat_dataset(
    grid_shape: tuple[int, int] = (3, 3),
    n_provinces: int = 3,
    n_seasons: int = 8,
    capture_intercept: float = -4.0,
    capture_effort_slope: float = 0.6,
    growth_rate: float = 0.8,
    carrying_capacity: float = 200.0,
    neighbor_effect: float = 0.3,
    effort_range: tuple[float, float] = (5.0, 3000.0),
    seed: int = 0,
) -> tuple[MuskratDataset, dict]:
    """Generate a site-grid removal dataset from the removal-process equations.

    Sites form a grid_shape lattice with 8-neighborhoods; provinces are
    vertical stripes of columns. Efforts are log-uniform over effort_range so
    both flanks of the capture curve appear: high-effort seasons nearly
    census a site, which anchors the latent abundances and the capture
    intercept. Returns the dataset plus the true parameters and latent
    abundance matrix.
    """
    nx, ny = grid_shape
    n_sites = nx * ny
    if n_provinces > nx:
        raise ValidationError("need at least one grid column per province")
    rng = np.random.Generator(np.random.PCG64(seed))

    provinces = tuple(f"P{k}" for k in range(n_provinces))
    sites = []
    for x in range(nx):
        prov = provinces[min(x * n_provinces // nx, n_provinces - 1)]
        for y in range(ny):
            sites.append(Site(site_id=f"S{x}{y}", province_id=prov, grid_x=x, grid_y=y))

    adjacency = _grid_adjacency(sites)
    effort_prov = np.exp(
        rng.uniform(
            np.log(effort_range[0]), np.log(effort_range[1]),
            size=(n_provinces, n_seasons),
        )
    )

    prov_lookup = {p: i for i, p in enumerate(provinces)}
    prov_index = np.array([prov_lookup[s.province_id] for s in sites])
    effort_site = effort_prov[prov_index, :]

    weights = np.zeros((n_sites, n_sites))
    for i, nb in enumerate(adjacency):
        if nb:
            weights[i, list(nb)] = 1.0 / len(nb)

    n_latent = np.zeros((n_sites, n_seasons))
    catch = np.zeros((n_sites, n_seasons))
    n_latent[:, 0] = rng.poisson(0.6 * carrying_capacity, size=n_sites) + 1
    for t in range(n_seasons):
        p = capture_prob(effort_site[:, t], capture_intercept, capture_effort_slope)
        catch[:, t] = rng.binomial(n_latent[:, t].astype(np.int64), p)
        if t + 1 < n_seasons:
            neighb = neighbor_cpue(catch[:, t], effort_site[:, t], weights)
            mu = process_mean(
                n_latent[:, t], catch[:, t], growth_rate, carrying_capacity,
                neighbor_effect, neighb,
            )
            n_latent[:, t + 1] = np.maximum(rng.poisson(mu), 1)

    data = MuskratDataset(
        sites=sites,
        provinces=provinces,
        n_seasons=n_seasons,
        catch=catch,
        effort_prov=effort_prov,
        adjacency=adjacency,
    )
    truth = {
        "capture_intercept": capture_intercept,
        "capture_effort_slope": capture_effort_slope,
        "growth_rate": growth_rate,
        "carrying_capacity": carrying_capacity,
        "neighbor_effect": neighbor_effect,
        "n_latent": n_latent,
    }
    return data, truth


def symmetric_muskrat_dataset(
    n_provinces: int = 4,
    sites_per_province: int = 2,
    n_seasons: int = 6,
    effort_level: float = 80.0,
    seed: int = 0,
    **model_params,
) -> tuple[MuskratDataset, dict]:
    """Provinces that are exchangeable by construction.

    Each province is an isolated row of adjacent sites, all provinces share
    one catch/abundance history (generated once and replicated), and effort
    is constant. Useful for allocation symmetry checks.
    """
    params = {
        "capture_intercept": -4.0,
        "capture_effort_slope": 0.6,
        "growth_rate": 0.8,
        "carrying_capacity": 200.0,
        "neighbor_effect": 0.3,
    }
    params.update(model_params)
    rng = np.random.Generator(np.random.PCG64(seed))

    provinces = tuple(f"P{k}" for k in range(n_provinces))
    sites = []
    for k in range(n_provinces):
        for j in range(sites_per_province):
            # rows separated by 2 so provinces never touch in the 8-neighborhood
            sites.append(
                Site(site_id=f"S{k}{j}", province_id=provinces[k], grid_x=j, grid_y=2 * k)
            )
    adjacency = _grid_adjacency(sites)

    effort_prov = np.full((n_provinces, n_seasons), float(effort_level))
    one_catch = np.zeros((sites_per_province, n_seasons))
    one_latent = np.zeros((sites_per_province, n_seasons))
    one_latent[:, 0] = np.maximum(
        rng.poisson(0.6 * params["carrying_capacity"], size=sites_per_province), 1
    )

    w = np.zeros((sites_per_province, sites_per_province))
    for j in range(sites_per_province):
        nbs = [i for i in (j - 1, j + 1) if 0 <= i < sites_per_province]
        if nbs:
            w[j, nbs] = 1.0 / len(nbs)

    for t in range(n_seasons):
        p = capture_prob(
            effort_level, params["capture_intercept"], params["capture_effort_slope"]
        )
        one_catch[:, t] = rng.binomial(one_latent[:, t].astype(np.int64), p)
        if t + 1 < n_seasons:
            neighb = neighbor_cpue(
                one_catch[:, t], np.full(sites_per_province, effort_level), w
            )
            mu = process_mean(
                one_latent[:, t], one_catch[:, t], params["growth_rate"],
                params["carrying_capacity"], params["neighbor_effect"], neighb,
            )
            one_latent[:, t + 1] = np.maximum(rng.poisson(mu), 1)

    catch = np.tile(one_catch, (n_provinces, 1))
    n_latent = np.tile(one_latent, (n_provinces, 1))

    data = MuskratDataset(
        sites=sites,
        provinces=provinces,
        n_seasons=n_seasons,
        catch=catch,
        effort_prov=effort_prov,
        adjacency=adjacency,
    )
    truth = dict(params)
    truth["n_latent"] = n_latent
    return data, truth


def point_mass_posterior(
    parameter_names, values, n_rows: int = 2, seed: int = 0
) -> PosteriorSample:
    """A posterior whose draws all equal one parameter vector.

    Handy for tests that need the decision layer without an MCMC run.
    """
    names = tuple(parameter_names)
    vals = np.asarray(values, dtype=float)
    if vals.shape != (len(names),):
        raise ValidationError("values must align with parameter_names")
    if n_rows < 2 or n_rows % 2 != 0:
        raise ValidationError("n_rows must be an even integer >= 2")
    draws = np.tile(vals, (n_rows, 1))
    config = ChainConfig(
        n_iterations=n_rows // 2, n_burnin=0, n_chains=2, seed=seed
    )
    diagnostics = {
        name: ParamDiagnostics(rhat=1.0, ess=float(n_rows), degenerate=True)
        for name in names
    }
    return PosteriorSample(
        draws=draws,
        parameter_names=names,
        diagnostics=diagnostics,
        provenance=config,
        warnings=(),
    )


def _grid_adjacency(sites) -> list[tuple[int, ...]]:
    """8-neighborhood adjacency from integer grid coordinates."""
    coords = {(s.grid_x, s.grid_y): i for i, s in enumerate(sites)}
    if len(coords) != len(sites):
        raise ValidationError("sites must have unique grid coordinates")
    adjacency = []
    for s in sites:
        nbs = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                j = coords.get((s.grid_x + dx, s.grid_y + dy))
                if j is not None:
                    nbs.append(j)
        adjacency.append(tuple(sorted(nbs)))
    return adjacency
