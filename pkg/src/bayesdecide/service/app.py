"""HTTP what-if service over a directory of stored posteriors.

Read-only and stateless: every request loads (cached) posterior files, runs
the decision analysis with the request's seed, and echoes provenance. Long
evaluations are bounded by configurable draw/replicate caps; when a cap
tightens what was asked for, the response carries reduced_precision=true.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import analysis
from ..decisions import DiscreteDecisionProblem, discrete_optimal_action
from ..errors import BayesdecideError, DomainError, ValidationError
from ..muskrat import MuskratPreferences
from ..store import ARTIFACT_VERSION, DRAWS_SUFFIX, META_SUFFIX, load_posterior, sha256_file
from ..wolf import WolfPreferences
from .schemas import (
    AllocationResponse,
    CurveResponse,
    DiscreteWhatIfRequest,
    DiscreteWhatIfResponse,
    HealthResponse,
    ManifestEcho,
    MuskratPreferencesModel,
    PosteriorSummary,
    WhatIfRequest,
    WolfPreferencesModel,
)

ALLOCATE_CANDIDATES_CAP = 80
ALLOCATE_ROUNDS_CAP = 5


class PosteriorStore:
    """Loads stored posteriors by id, caching on (mtime, size)."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self._cache: dict[str, tuple[tuple, object]] = {}

    def ids(self) -> list[str]:
        from ..store import list_posteriors

        return list_posteriors(self.directory)

    def _paths(self, posterior_id: str) -> tuple[Path, Path]:
        base = self.directory / posterior_id
        return (
            base.with_name(base.name + DRAWS_SUFFIX),
            base.with_name(base.name + META_SUFFIX),
        )

    def get(self, posterior_id: str):
        if "/" in posterior_id or posterior_id.startswith("."):
            raise HTTPException(status_code=404, detail=f"unknown posterior {posterior_id!r}")
        draws_path, meta_path = self._paths(posterior_id)
        if not (draws_path.exists() and meta_path.exists()):
            raise HTTPException(status_code=404, detail=f"unknown posterior {posterior_id!r}")
        stamp = tuple(
            (p.stat().st_mtime_ns, p.stat().st_size) for p in (draws_path, meta_path)
        )
        cached = self._cache.get(posterior_id)
        if cached and cached[0] == stamp:
            return cached[1]
        stored = load_posterior(self.directory / posterior_id)
        self._cache[posterior_id] = (stamp, stored)
        return stored

    def digests(self, posterior_id: str) -> dict[str, str]:
        draws_path, meta_path = self._paths(posterior_id)
        return {p.name: sha256_file(p) for p in (draws_path, meta_path)}


def create_app(store_dir, draws_cap: int = 200, reps_cap: int = 200) -> FastAPI:
    app = FastAPI(title="bayesdecide what-if service", version=ARTIFACT_VERSION)
    store = PosteriorStore(store_dir)

    @app.exception_handler(RequestValidationError)
    async def on_request_validation(request: Request, exc: RequestValidationError):
        detail = [
            {
                "field": ".".join(str(part) for part in err.get("loc", ())),
                "message": err.get("msg", ""),
            }
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.exception_handler(ValidationError)
    async def on_validation(request: Request, exc: ValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(DomainError)
    async def on_domain(request: Request, exc: DomainError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(BayesdecideError)
    async def on_package_error(request: Request, exc: BayesdecideError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", artifact_version=ARTIFACT_VERSION)

    @app.get("/posteriors", response_model=list[PosteriorSummary])
    def posteriors():
        out = []
        for pid in store.ids():
            stored = store.get(pid)
            rhats = [
                d.rhat for d in stored.sample.diagnostics.values() if math.isfinite(d.rhat)
            ]
            esses = [
                d.ess for d in stored.sample.diagnostics.values() if math.isfinite(d.ess)
            ]
            out.append(
                PosteriorSummary(
                    id=pid,
                    model=stored.model,
                    n_draws=stored.sample.n_draws,
                    n_parameters=len(stored.sample.parameter_names),
                    max_rhat=max(rhats) if rhats else None,
                    min_ess=min(esses) if esses else None,
                    warnings=list(stored.sample.warnings),
                )
            )
        return out

    @app.post("/whatif/discrete", response_model=DiscreteWhatIfResponse)
    def whatif_discrete(req: DiscreteWhatIfRequest):
        problem = DiscreteDecisionProblem(
            states=req.states,
            state_probs=req.state_probs,
            actions=req.actions,
            utility=req.utility,
            renormalize=req.renormalize,
        )
        best, eu_list = discrete_optimal_action(problem)
        return DiscreteWhatIfResponse(
            actions=[a for a, _ in eu_list],
            expected_utilities=[eu for _, eu in eu_list],
            optimal_action=best,
            optimal_index=list(problem.actions).index(best),
        )

    def _manifest(req: WhatIfRequest, config: dict) -> ManifestEcho:
        return ManifestEcho(
            seed=req.seed,
            artifact_version=ARTIFACT_VERSION,
            posterior_id=req.posterior_id,
            inputs=store.digests(req.posterior_id),
            config={k: str(v) for k, v in config.items()},
        )

    @app.post("/whatif")
    def whatif(req: WhatIfRequest):
        stored = store.get(req.posterior_id)
        if stored.model != req.model:
            raise HTTPException(
                status_code=400,
                detail=f"posterior {req.posterior_id!r} is a {stored.model} fit, "
                f"request says {req.model}",
            )

        available = stored.sample.n_draws
        want_draws = min(req.draws_cap or available, available)
        applied_draws = min(want_draws, draws_cap)
        reduced = applied_draws < want_draws

        if req.model == "wolf":
            if not isinstance(req.preferences, WolfPreferencesModel):
                raise HTTPException(
                    status_code=400, detail="wolf requests need wolf preferences"
                )
            want_reps = req.n_reps or analysis.WOLF_DEFAULT_REPS
            applied_reps = min(want_reps, reps_cap)
            reduced = reduced or applied_reps < want_reps
            prefs = WolfPreferences(
                benefit=req.preferences.benefit,
                cost=req.preferences.cost,
                risk_aversion=req.preferences.risk_aversion,
                n_min=req.preferences.n_min,
            )
            grid = (
                req.harvest_grid
                if req.harvest_grid
                else analysis.default_harvest_grid(stored.sample, stored.dataset)
            )
            cache = analysis.build_wolf_cache(
                stored.sample, stored.dataset, grid, [prefs.n_min],
                n_reps=applied_reps, seed=req.seed, draws_cap=applied_draws,
            )
            curve = analysis.wolf_eu_curve(
                stored.sample, stored.dataset, prefs, grid, cache=cache
            )
            return CurveResponse(
                model="wolf",
                actions=[float(a) for a in curve.actions],
                means=[s.mean for s in curve.scores],
                std_errors=[s.std_error for s in curve.scores],
                n_samples=curve.config.n_draws,
                optimum_index=curve.optimum_index,
                optimum_action=float(curve.optimum_action),
                ambiguous=curve.ambiguous,
                risk=[float(r) for r in cache.pooled_risk()[:, 0]],
                reduced_precision=reduced,
                manifest=_manifest(
                    req,
                    {
                        "n_draws": curve.config.n_draws,
                        "n_reps": curve.config.n_reps,
                        "grid_size": len(grid),
                        "n_min": prefs.n_min,
                    },
                ),
            )

        if not isinstance(req.preferences, MuskratPreferencesModel):
            raise HTTPException(
                status_code=400, detail="muskrat requests need muskrat preferences"
            )
        want_reps = req.n_reps or analysis.MUSKRAT_DEFAULT_REPS
        applied_reps = min(want_reps, reps_cap)
        reduced = reduced or applied_reps < want_reps
        prefs = MuskratPreferences(
            effort_cost=req.preferences.effort_cost,
            abundance_penalty=req.preferences.abundance_penalty,
        )

        if req.budget is not None:
            n_candidates = min(
                ALLOCATE_CANDIDATES_CAP, max(stored.dataset.n_provinces + 2, 50)
            )
            result = analysis.allocate_budget(
                stored.sample, stored.dataset, prefs, req.budget,
                n_candidates=n_candidates, refine_rounds=ALLOCATE_ROUNDS_CAP,
                n_reps=applied_reps, seed=req.seed, draws_cap=applied_draws,
            )
            efforts = list(result.best.effort_by_province)
            return AllocationResponse(
                model="muskrat",
                provinces=list(stored.dataset.provinces),
                efforts=[float(e) for e in efforts],
                shares=[float(s) for s in result.best.shares()],
                budget=float(req.budget),
                eu_mean=result.best_score.mean,
                eu_std_error=result.best_score.std_error,
                ambiguous=result.candidates.ambiguous,
                candidates_evaluated=len(result.candidates.actions),
                reduced_precision=True,  # service always caps the allocation search
                manifest=_manifest(
                    req,
                    {
                        "n_reps": applied_reps,
                        "n_candidates": n_candidates,
                        "refine_rounds": ALLOCATE_ROUNDS_CAP,
                        "budget": req.budget,
                    },
                ),
            )

        from ..cli import default_effort_grid

        grid = req.effort_grid if req.effort_grid else default_effort_grid(stored.dataset)
        cache, sim = analysis.build_uniform_effort_cache(
            stored.sample, stored.dataset, grid,
            n_reps=applied_reps, seed=req.seed, draws_cap=applied_draws,
        )
        curve = analysis.uniform_effort_curve(
            stored.sample, stored.dataset, prefs, grid, cache=cache, sim=sim
        )
        return CurveResponse(
            model="muskrat",
            actions=[float(a) for a in curve.actions],
            means=[s.mean for s in curve.scores],
            std_errors=[s.std_error for s in curve.scores],
            n_samples=curve.config.n_draws,
            optimum_index=curve.optimum_index,
            optimum_action=float(curve.optimum_action),
            ambiguous=curve.ambiguous,
            mean_abundance=[float(v) for v in np.asarray(cache).mean(axis=1)],
            reduced_precision=reduced,
            manifest=_manifest(
                req,
                {
                    "n_draws": curve.config.n_draws,
                    "n_reps": curve.config.n_reps,
                    "grid_size": len(grid),
                },
            ),
        )

    return app
