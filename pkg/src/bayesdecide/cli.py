"""Command-line interface: fit models, score decisions, run sweeps, serve.

Thin client over the core package. Exit codes: 0 success, 2 validation
failure, 3 runtime or convergence failure under --strict.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, datasets, store
from .errors import BayesdecideError, DomainError, ValidationError
from .mcmc import ChainConfig
from .muskrat import MuskratPreferences, fit_muskrat
from .wolf import WolfPreferences, fit_wolf

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def parse_grid(spec: str, kind=float) -> list:
    """Parse `start:stop:step` (stop-inclusive) or a comma-separated list."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValidationError(f"grid must be start:stop:step, got {spec!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValidationError("grid step must be > 0")
        values = np.arange(start, stop + step * 1e-9, step)
    else:
        values = np.array([float(p) for p in spec.split(",") if p.strip() != ""])
    if values.size == 0:
        raise ValidationError(f"empty grid spec {spec!r}")
    if kind is int:
        if np.any(values != np.round(values)):
            raise ValidationError(f"grid {spec!r} must contain integers")
        return [int(v) for v in values]
    return [float(v) for v in values]


def _fmt(value: float) -> str:
    return repr(float(value))


def _add_common_decision_flags(parser):
    parser.add_argument("--posterior", required=True, help="stored posterior base path")
    parser.add_argument("--reps", type=int, default=None, help="replicates per draw")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--draws-cap", type=int, default=analysis.DEFAULT_DRAWS_CAP,
        help="thin the posterior to at most this many draws",
    )
    parser.add_argument("--out", required=True, help="report output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayesdecide",
        description="Bayesian decision analysis for wildlife management",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a population model by MCMC")
    p_fit.add_argument("--model", choices=["wolf", "muskrat"], required=True)
    p_fit.add_argument("--data", help="wolf dataset CSV")
    p_fit.add_argument("--sites", help="muskrat sites CSV")
    p_fit.add_argument("--observations", help="muskrat observations CSV")
    p_fit.add_argument("--iters", type=int, default=None)
    p_fit.add_argument("--burnin", type=int, default=None)
    p_fit.add_argument("--chains", type=int, default=2)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--out", required=True, help="posterior base path (no extension)")
    p_fit.add_argument(
        "--strict", action="store_true",
        help="exit 3 when any split R-hat exceeds the threshold",
    )
    p_fit.add_argument("--rhat-threshold", type=float, default=1.1)

    p_dec = sub.add_parser("decide", help="score an expected-utility curve")
    _add_common_decision_flags(p_dec)
    p_dec.add_argument("--b", type=float, help="wolf benefit per removal")
    p_dec.add_argument("--c", type=float, help="wolf cost per removal / muskrat effort cost")
    p_dec.add_argument("--alpha", type=float, help="wolf risk aversion")
    p_dec.add_argument("--nmin", type=float, help="wolf minimum population threshold")
    p_dec.add_argument("--gamma", type=float, help="muskrat abundance penalty")
    p_dec.add_argument("--harvest-grid", help="wolf grid: start:stop:step or list")
    p_dec.add_argument("--effort-grid", help="muskrat grid: start:stop:step or list")

    p_alloc = sub.add_parser("allocate", help="optimize a budgeted effort allocation")
    _add_common_decision_flags(p_alloc)
    p_alloc.add_argument("--budget", type=float)
    p_alloc.add_argument("--budget-sweep", help="comma-separated increasing budgets")
    p_alloc.add_argument("--c", type=float, required=True, help="effort cost")
    p_alloc.add_argument("--gamma", type=float, required=True, help="abundance penalty")
    p_alloc.add_argument("--candidates", type=int, default=500)
    p_alloc.add_argument("--rounds", type=int, default=10)

    p_sweep = sub.add_parser("sweep", help="preference sensitivity sweep")
    _add_common_decision_flags(p_sweep)
    p_sweep.add_argument("--b-grid", help="wolf benefit grid")
    p_sweep.add_argument("--c-grid", help="wolf cost grid / muskrat effort-cost grid")
    p_sweep.add_argument("--alpha-grid", help="wolf risk-aversion grid")
    p_sweep.add_argument("--nmin-grid", help="wolf threshold grid")
    p_sweep.add_argument("--gamma-grid", help="muskrat abundance-penalty grid")
    p_sweep.add_argument("--harvest-grid", help="wolf action grid")
    p_sweep.add_argument("--effort-grid", help="muskrat action grid")
    p_sweep.add_argument(
        "--verify-cache", action="store_true",
        help="rebuild the simulation cache and require bitwise equality",
    )

    p_serve = sub.add_parser("serve", help="run the what-if HTTP service")
    p_serve.add_argument("--store", required=True, help="directory of stored posteriors")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--draws-cap", type=int, default=200)
    p_serve.add_argument("--reps-cap", type=int, default=200)

    return parser


def cmd_fit(args) -> int:
    if args.model == "wolf":
        if not args.data:
            raise ValidationError("wolf fit requires --data")
        data = datasets.load_wolf_dataset(args.data)
        iters = args.iters if args.iters is not None else 20_000
        burnin = args.burnin if args.burnin is not None else 2_000
        config = ChainConfig(
            n_iterations=iters, n_burnin=burnin, n_chains=args.chains, seed=args.seed
        )
        sample = fit_wolf(data, config)
        inputs = {Path(args.data).name: store.sha256_file(args.data)}
    else:
        if not (args.sites and args.observations):
            raise ValidationError("muskrat fit requires --sites and --observations")
        data = datasets.load_muskrat_dataset(args.sites, args.observations)
        iters = args.iters if args.iters is not None else 30_000
        burnin = args.burnin if args.burnin is not None else 10_000
        config = ChainConfig(
            n_iterations=iters, n_burnin=burnin, n_chains=args.chains, seed=args.seed
        )
        sample = fit_muskrat(data, config)
        inputs = {
            Path(args.sites).name: store.sha256_file(args.sites),
            Path(args.observations).name: store.sha256_file(args.observations),
        }

    base = Path(args.out)
    draws_path, meta_path = store.save_posterior(sample, base, args.model, data)
    store.write_manifest(
        base.with_name(base.name + store.MANIFEST_SUFFIX),
        command="fit",
        inputs=inputs,
        seed=args.seed,
        config_echo={
            "model": args.model,
            "n_iterations": config.n_iterations,
            "n_burnin": config.n_burnin,
            "n_chains": config.n_chains,
        },
    )
    worst = max(
        (d.rhat for d in sample.diagnostics.values() if np.isfinite(d.rhat)),
        default=float("nan"),
    )
    print(f"wrote {draws_path} and {meta_path}")
    print(f"max split R-hat: {worst:.4f}; draws kept: {sample.n_draws}")
    for w in sample.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.strict and worst > args.rhat_threshold:
        print(
            f"strict mode: max R-hat {worst:.4f} exceeds {args.rhat_threshold}",
            file=sys.stderr,
        )
        return EXIT_RUNTIME
    return EXIT_OK


def _posterior_inputs(base: Path) -> dict[str, str]:
    return {
        p.name: store.sha256_file(p)
        for p in (
            base.with_name(base.name + store.DRAWS_SUFFIX),
            base.with_name(base.name + store.META_SUFFIX),
        )
    }


def cmd_decide(args) -> int:
    base = Path(args.posterior)
    stored = store.load_posterior(base)
    if stored.model == "wolf":
        for flag, name in ((args.b, "--b"), (args.c, "--c"), (args.alpha, "--alpha"), (args.nmin, "--nmin")):
            if flag is None:
                raise ValidationError(f"wolf decide requires {name}")
        prefs = WolfPreferences(
            benefit=args.b, cost=args.c, risk_aversion=args.alpha, n_min=args.nmin
        )
        grid = (
            parse_grid(args.harvest_grid, int)
            if args.harvest_grid
            else analysis.default_harvest_grid(stored.sample, stored.dataset)
        )
        n_reps = args.reps if args.reps is not None else analysis.WOLF_DEFAULT_REPS
        cache = analysis.build_wolf_cache(
            stored.sample, stored.dataset, grid, [prefs.n_min],
            n_reps=n_reps, seed=args.seed, draws_cap=args.draws_cap,
        )
        curve = analysis.wolf_eu_curve(
            stored.sample, stored.dataset, prefs, grid, cache=cache
        )
        pooled_risk = cache.pooled_risk()[:, 0]
        metadata = {
            "command": "decide",
            "model": "wolf",
            "posterior": stored.name,
            "seed": args.seed,
            "n_draws": curve.config.n_draws,
            "n_reps": curve.config.n_reps,
            "benefit": _fmt(prefs.benefit),
            "cost": _fmt(prefs.cost),
            "risk_aversion": _fmt(prefs.risk_aversion),
            "n_min": _fmt(prefs.n_min),
            "optimum_index": curve.optimum_index,
            "optimum_action": curve.optimum_action,
            "optimum_eu": _fmt(curve.scores[curve.optimum_index].mean),
            "ambiguous": str(curve.ambiguous).lower(),
        }
        columns = ["harvest", "eu_mean", "eu_std_error", "risk"]
        rows = [
            [a, _fmt(s.mean), _fmt(s.std_error), _fmt(pooled_risk[i])]
            for i, (a, s) in enumerate(zip(curve.actions, curve.scores))
        ]
    else:
        for flag, name in ((args.c, "--c"), (args.gamma, "--gamma")):
            if flag is None:
                raise ValidationError(f"muskrat decide requires {name}")
        prefs = MuskratPreferences(effort_cost=args.c, abundance_penalty=args.gamma)
        grid = (
            parse_grid(args.effort_grid, float)
            if args.effort_grid
            else default_effort_grid(stored.dataset)
        )
        n_reps = args.reps if args.reps is not None else analysis.MUSKRAT_DEFAULT_REPS
        cache, sim = analysis.build_uniform_effort_cache(
            stored.sample, stored.dataset, grid,
            n_reps=n_reps, seed=args.seed, draws_cap=args.draws_cap,
        )
        curve = analysis.uniform_effort_curve(
            stored.sample, stored.dataset, prefs, grid, cache=cache, sim=sim
        )
        mean_abundance = cache.mean(axis=1)
        metadata = {
            "command": "decide",
            "model": "muskrat",
            "posterior": stored.name,
            "seed": args.seed,
            "n_draws": curve.config.n_draws,
            "n_reps": curve.config.n_reps,
            "effort_cost": _fmt(prefs.effort_cost),
            "abundance_penalty": _fmt(prefs.abundance_penalty),
            "optimum_index": curve.optimum_index,
            "optimum_action": _fmt(curve.optimum_action),
            "optimum_eu": _fmt(curve.scores[curve.optimum_index].mean),
            "ambiguous": str(curve.ambiguous).lower(),
        }
        columns = ["effort", "eu_mean", "eu_std_error", "mean_total_abundance"]
        rows = [
            [_fmt(a), _fmt(s.mean), _fmt(s.std_error), _fmt(mean_abundance[i])]
            for i, (a, s) in enumerate(zip(curve.actions, curve.scores))
        ]

    out = Path(args.out)
    store.write_report(out, metadata, columns, rows)
    store.write_manifest(
        out.with_name(out.name + store.MANIFEST_SUFFIX),
        command="decide",
        inputs=_posterior_inputs(base),
        seed=args.seed,
        config_echo={k: str(v) for k, v in metadata.items()},
    )
    print(
        f"optimum: {curve.optimum_action} "
        f"(EU {curve.scores[curve.optimum_index].mean:.4f}, "
        f"ambiguous: {str(curve.ambiguous).lower()})"
    )
    return EXIT_OK


def default_effort_grid(data) -> list[float]:
    top = 1.5 * float(np.max(data.effort_prov)) if np.max(data.effort_prov) > 0 else 100.0
    return [float(v) for v in np.linspace(0.0, top, 16)]


def cmd_allocate(args) -> int:
    base = Path(args.posterior)
    stored = store.load_posterior(base)
    if stored.model != "muskrat":
        raise ValidationError("allocate requires a muskrat posterior")
    prefs = MuskratPreferences(effort_cost=args.c, abundance_penalty=args.gamma)
    n_reps = args.reps if args.reps is not None else analysis.MUSKRAT_DEFAULT_REPS

    out = Path(args.out)
    if args.budget_sweep:
        budgets = [float(b) for b in args.budget_sweep.split(",") if b.strip()]
        profile = analysis.allocation_share_profile(
            stored.sample, stored.dataset, prefs, budgets,
            n_candidates=args.candidates, refine_rounds=args.rounds,
            n_reps=n_reps, seed=args.seed, draws_cap=args.draws_cap,
        )
        metadata = {
            "command": "allocate",
            "mode": "budget-sweep",
            "model": "muskrat",
            "posterior": stored.name,
            "seed": args.seed,
            "n_reps": n_reps,
            "effort_cost": _fmt(prefs.effort_cost),
            "abundance_penalty": _fmt(prefs.abundance_penalty),
            "provinces": ",".join(profile.provinces),
        }
        columns = ["budget"] + [f"share_{p}" for p in profile.provinces]
        rows = [
            [_fmt(b)] + [_fmt(s) for s in profile.shares[i]]
            for i, b in enumerate(profile.budgets)
        ]
        summary = f"budget sweep over {len(budgets)} budgets written"
    else:
        if args.budget is None:
            raise ValidationError("allocate requires --budget or --budget-sweep")
        result = analysis.allocate_budget(
            stored.sample, stored.dataset, prefs, args.budget,
            n_candidates=args.candidates, refine_rounds=args.rounds,
            n_reps=n_reps, seed=args.seed, draws_cap=args.draws_cap,
        )
        metadata = {
            "command": "allocate",
            "mode": "single-budget",
            "model": "muskrat",
            "posterior": stored.name,
            "seed": args.seed,
            "n_reps": n_reps,
            "effort_cost": _fmt(prefs.effort_cost),
            "abundance_penalty": _fmt(prefs.abundance_penalty),
            "budget": _fmt(args.budget),
            "eu_mean": _fmt(result.best_score.mean),
            "eu_std_error": _fmt(result.best_score.std_error),
            "ambiguous": str(result.candidates.ambiguous).lower(),
            "candidates": len(result.candidates.actions),
            "refine_steps": result.refine_steps,
        }
        columns = ["province", "effort", "share"]
        rows = [
            [p, _fmt(e), _fmt(e / args.budget)]
            for p, e in zip(stored.dataset.provinces, result.best.effort_by_province)
        ]
        summary = (
            f"best allocation EU {result.best_score.mean:.4f} "
            f"(ambiguous: {str(result.candidates.ambiguous).lower()})"
        )

    store.write_report(out, metadata, columns, rows)
    store.write_manifest(
        out.with_name(out.name + store.MANIFEST_SUFFIX),
        command="allocate",
        inputs=_posterior_inputs(base),
        seed=args.seed,
        config_echo={k: str(v) for k, v in metadata.items()},
    )
    print(summary)
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = Path(args.posterior)
    stored = store.load_posterior(base)
    out = Path(args.out)

    if stored.model == "wolf":
        required = {
            "--b-grid": args.b_grid, "--c-grid": args.c_grid,
            "--alpha-grid": args.alpha_grid, "--nmin-grid": args.nmin_grid,
        }
        for name, value in required.items():
            if not value:
                raise ValidationError(f"wolf sweep requires {name}")
        grid = (
            parse_grid(args.harvest_grid, int)
            if args.harvest_grid
            else analysis.default_harvest_grid(stored.sample, stored.dataset)
        )
        n_reps = args.reps if args.reps is not None else analysis.WOLF_DEFAULT_REPS
        result = analysis.wolf_sensitivity(
            stored.sample, stored.dataset,
            benefit_values=parse_grid(args.b_grid),
            cost_values=parse_grid(args.c_grid),
            risk_aversion_values=parse_grid(args.alpha_grid),
            n_min_values=parse_grid(args.nmin_grid),
            harvest_grid=grid,
            n_reps=n_reps, seed=args.seed, draws_cap=args.draws_cap,
            verify_cache=args.verify_cache,
        )
        columns = [name for name, _ in result.axes] + ["optimal_harvest"]
        rows = []
        axes_values = [values for _, values in result.axes]
        for idx in np.ndindex(result.cells.shape):
            rows.append(
                [_fmt(axes_values[d][i]) for d, i in enumerate(idx)]
                + [int(result.cells[idx])]
            )
    else:
        required = {"--c-grid": args.c_grid, "--gamma-grid": args.gamma_grid}
        for name, value in required.items():
            if not value:
                raise ValidationError(f"muskrat sweep requires {name}")
        grid = (
            parse_grid(args.effort_grid, float)
            if args.effort_grid
            else default_effort_grid(stored.dataset)
        )
        n_reps = args.reps if args.reps is not None else analysis.MUSKRAT_DEFAULT_REPS
        result = analysis.muskrat_sensitivity(
            stored.sample, stored.dataset,
            effort_cost_values=parse_grid(args.c_grid),
            abundance_penalty_values=parse_grid(args.gamma_grid),
            effort_grid=grid,
            n_reps=n_reps, seed=args.seed, draws_cap=args.draws_cap,
            verify_cache=args.verify_cache,
        )
        columns = [name for name, _ in result.axes] + ["optimal_effort"]
        rows = []
        axes_values = [values for _, values in result.axes]
        for idx in np.ndindex(result.cells.shape):
            rows.append(
                [_fmt(axes_values[d][i]) for d, i in enumerate(idx)]
                + [_fmt(result.cells[idx])]
            )

    metadata = {
        "command": "sweep",
        "model": stored.model,
        "posterior": stored.name,
        "seed": args.seed,
        "n_draws": result.config.n_draws,
        "n_reps": result.config.n_reps,
        "cache_digest": result.cache_digest,
        "cache_verified": str(bool(args.verify_cache)).lower(),
        "axes": ";".join(name for name, _ in result.axes),
    }
    store.write_report(out, metadata, columns, rows)
    store.write_manifest(
        out.with_name(out.name + store.MANIFEST_SUFFIX),
        command="sweep",
        inputs=_posterior_inputs(base),
        seed=args.seed,
        config_echo={k: str(v) for k, v in metadata.items()},
    )
    print(f"sweep of {result.cells.size} cells written to {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(
        store_dir=args.store, draws_cap=args.draws_cap, reps_cap=args.reps_cap
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "fit": cmd_fit,
        "decide": cmd_decide,
        "allocate": cmd_allocate,
        "sweep": cmd_sweep,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BayesdecideError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
