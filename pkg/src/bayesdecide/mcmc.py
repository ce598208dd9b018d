"""Adaptive random-walk Metropolis-within-Gibbs sampler.

The sampler is generic over a model-provided log posterior: each parameter is
updated in turn with a symmetric random walk on an unconstrained scale
(log-transform for positive parameters, logit for bounded ones, integer steps
for integer support), with Jacobian corrections applied in the acceptance
ratio. Proposal scales adapt during burn-in toward a target acceptance rate
and are frozen afterward, so the post-burn-in kernel is a fixed Markov chain.
Chains draw from independent RNG streams derived from (seed, chain index) and
results are bit-reproducible for a given configuration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .diagnostics import effective_sample_size, is_degenerate, split_rhat
from .errors import InitializationError, ValidationError

ADAPT_BATCH = 50  # iterations per Robbins-Monro adaptation window

_REAL, _POSITIVE, _BOUNDED, _POS_INT = 0, 1, 2, 3
_KIND_NAMES = {
    _REAL: "real",
    _POSITIVE: "positive-real",
    _BOUNDED: "bounded",
    _POS_INT: "positive-integer",
}
_KIND_CODES = {name: code for code, name in _KIND_NAMES.items()}


@dataclass(frozen=True)
class Support:
    """Admissible set for one parameter."""

    kind: str
    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValidationError(f"unknown support kind {self.kind!r}")
        if self.kind == "bounded" and not (self.lo < self.hi):
            raise ValidationError(f"bounded support needs lo < hi, got ({self.lo}, {self.hi})")

    @staticmethod
    def real() -> "Support":
        return Support("real")

    @staticmethod
    def positive() -> "Support":
        return Support("positive-real", lo=0.0)

    @staticmethod
    def bounded(lo: float, hi: float) -> "Support":
        return Support("bounded", lo=lo, hi=hi)

    @staticmethod
    def positive_integer() -> "Support":
        return Support("positive-integer", lo=1.0)

    def contains(self, x: float) -> bool:
        if not math.isfinite(x):
            return False
        if self.kind == "real":
            return True
        if self.kind == "positive-real":
            return x > 0.0
        if self.kind == "bounded":
            return self.lo < x < self.hi
        return x >= 1.0 and float(x).is_integer()


@dataclass(frozen=True)
class ParameterSpec:
    """Name, support, starting point and initial proposal scale for one parameter."""

    name: str
    support: Support
    initial: float
    proposal_scale: float = 1.0

    def __post_init__(self):
        if not self.support.contains(self.initial):
            raise ValidationError(
                f"initial value {self.initial!r} of {self.name!r} is outside "
                f"its {self.support.kind} support"
            )
        if not (self.proposal_scale > 0):
            raise ValidationError(f"proposal_scale of {self.name!r} must be > 0")


@dataclass(frozen=True)
class ChainConfig:
    """MCMC run settings: chain count, lengths, seed and adaptation policy."""

    n_iterations: int
    n_burnin: int
    n_chains: int = 2
    seed: int = 0
    adapt_during_burnin_only: bool = True
    target_acceptance: float = 0.44

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ValidationError("n_iterations must be a positive integer")
        if not (0 <= self.n_burnin < self.n_iterations):
            raise ValidationError("n_burnin must satisfy 0 <= n_burnin < n_iterations")
        if self.n_chains < 2:
            raise ValidationError("n_chains must be >= 2")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed must fit in an unsigned 64-bit integer")
        if not (0.0 < self.target_acceptance < 1.0):
            raise ValidationError("target_acceptance must lie in (0, 1)")


@dataclass(frozen=True)
class ParamDiagnostics:
    rhat: float
    ess: float
    degenerate: bool = False


@dataclass(frozen=True)
class PosteriorSample:
    """Pooled post-burn-in draws plus per-parameter convergence diagnostics.

    ``draws`` is (n_kept, n_params) with chains stacked in order, so row block
    c*(kept per chain) .. (c+1)*(kept per chain) belongs to chain c.
    """

    draws: np.ndarray
    parameter_names: tuple[str, ...]
    diagnostics: dict[str, ParamDiagnostics]
    provenance: ChainConfig
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        kept = self.provenance.n_chains * (
            self.provenance.n_iterations - self.provenance.n_burnin
        )
        if self.draws.shape != (kept, len(self.parameter_names)):
            raise ValidationError(
                f"draws shape {self.draws.shape} does not match "
                f"{kept} kept draws x {len(self.parameter_names)} parameters"
            )

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.parameter_names.index(name)
        except ValueError:
            raise ValidationError(f"no parameter named {name!r}") from None
        return self.draws[:, j]

    def by_chain(self) -> np.ndarray:
        """View draws as (n_chains, kept_per_chain, n_params)."""
        c = self.provenance.n_chains
        return self.draws.reshape(c, self.n_draws // c, -1)


def _to_unconstrained(code: int, lo: float, hi: float, x: float) -> float:
    if code == _POSITIVE:
        return math.log(x)
    if code == _BOUNDED:
        p = (x - lo) / (hi - lo)
        return math.log(p / (1.0 - p))
    return x


def _from_unconstrained(code: int, lo: float, hi: float, z: float) -> float:
    if code == _POSITIVE:
        return math.exp(z)
    if code == _BOUNDED:
        s = 1.0 / (1.0 + math.exp(-z))
        return lo + (hi - lo) * s
    return z


def _log_jacobian(code: int, z: float) -> float:
    """log |dx/dz| up to additive constants that cancel in acceptance ratios."""
    if code == _POSITIVE:
        return z
    if code == _BOUNDED:
        # log sigmoid(z) + log(1 - sigmoid(z)) = -softplus(z) - softplus(-z)
        az = abs(z)
        return -(az + 2.0 * math.log1p(math.exp(-az)))
    return 0.0


def _run_chain(
    log_posterior: Callable[[np.ndarray], float],
    codes: np.ndarray,
    los: np.ndarray,
    his: np.ndarray,
    initials: np.ndarray,
    scales0: np.ndarray,
    config: ChainConfig,
    seed_seq: np.random.SeedSequence,
) -> tuple[np.ndarray, np.ndarray, list[str], int]:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    n_params = initials.size
    kept = config.n_iterations - config.n_burnin

    x = initials.astype(float).copy()
    x_view = x.view()
    x_view.flags.writeable = False
    z = np.array(
        [_to_unconstrained(codes[k], los[k], his[k], x[k]) for k in range(n_params)]
    )
    lp = float(log_posterior(x_view))
    if not math.isfinite(lp):
        raise InitializationError(f"log posterior is {lp} at the initial point")

    scales = scales0.astype(float).copy()
    out = np.empty((kept, n_params))
    accepted = np.zeros(n_params, dtype=np.int64)
    n_accepted_total = 0
    batch_index = 0
    warnings: list[str] = []
    stuck_reported = False

    it = 0
    while it < config.n_iterations:
        block = min(ADAPT_BATCH, config.n_iterations - it)
        eps = rng.standard_normal((block, n_params))
        u_acc = rng.random((block, n_params))
        u_step = rng.random((block, n_params))

        for i in range(block):
            for k in range(n_params):
                code = codes[k]
                if code == _POS_INT:
                    step = max(1, int(round(scales[k])))
                    m = int(u_step[i, k] * 2 * step)
                    if m >= 2 * step:
                        m = 2 * step - 1
                    delta = m - step if m < step else m - step + 1
                    x_new = x[k] + delta
                    if x_new < 1.0:
                        continue  # out of support: reject
                    old = x[k]
                    x[k] = x_new
                    lp_new = float(log_posterior(x_view))
                    d = lp_new - lp
                    if d >= 0.0 or u_acc[i, k] < math.exp(d):
                        lp = lp_new
                        accepted[k] += 1
                    else:
                        x[k] = old
                else:
                    z_new = z[k] + scales[k] * eps[i, k]
                    x_new = _from_unconstrained(code, los[k], his[k], z_new)
                    if code != _REAL and not (los[k] < x_new < his[k]):
                        continue  # under/overflow at the edge of support: reject
                    old = x[k]
                    x[k] = x_new
                    lp_new = float(log_posterior(x_view))
                    d = lp_new - lp + _log_jacobian(code, z_new) - _log_jacobian(code, z[k])
                    if d >= 0.0 or u_acc[i, k] < math.exp(d):
                        lp = lp_new
                        z[k] = z_new
                        accepted[k] += 1
                    else:
                        x[k] = old
            if it >= config.n_burnin:
                out[it - config.n_burnin] = x
            it += 1

        window_total = int(accepted.sum())
        n_accepted_total += window_total
        at_boundary = block == ADAPT_BATCH
        adapting = (it <= config.n_burnin) if config.adapt_during_burnin_only else True
        if at_boundary and adapting:
            batch_index += 1
            gain = 1.0 / math.sqrt(batch_index)
            frac = accepted / ADAPT_BATCH
            scales *= np.exp(gain * (frac - config.target_acceptance))
            if window_total == 0 and not stuck_reported:
                warnings.append(
                    f"stuck chain: no proposals accepted in the adaptation "
                    f"window ending at iteration {it}"
                )
                stuck_reported = True
        accepted[:] = 0

    return out, scales, warnings, n_accepted_total


def run_mcmc(
    log_posterior: Callable[[np.ndarray], float],
    specs: Sequence[ParameterSpec],
    config: ChainConfig,
) -> PosteriorSample:
    """Sample the given log posterior and return pooled post-burn-in draws.

    ``log_posterior`` receives a read-only parameter vector ordered like
    ``specs`` and must return a float (``-inf`` marks impossible states).
    Chain c uses an independent RNG stream spawned from (config.seed, c), so
    identical inputs give bit-identical output regardless of scheduling.
    """
    specs = list(specs)
    if not specs:
        raise ValidationError("specs must be non-empty")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValidationError("parameter names must be unique")

    codes = np.array([_KIND_CODES[s.support.kind] for s in specs], dtype=np.int64)
    los = np.array([s.support.lo for s in specs])
    his = np.array([s.support.hi for s in specs])
    initials = np.array([s.initial for s in specs], dtype=float)
    scales0 = np.array([s.proposal_scale for s in specs], dtype=float)

    root = np.random.SeedSequence(config.seed)
    streams = root.spawn(config.n_chains)

    per_chain = []
    warnings: list[str] = []
    for c in range(config.n_chains):
        out, _, chain_warnings, _ = _run_chain(
            log_posterior, codes, los, his, initials, scales0, config, streams[c]
        )
        per_chain.append(out)
        warnings.extend(f"chain {c}: {w}" for w in chain_warnings)

    stacked = np.stack(per_chain)  # (n_chains, kept, n_params)
    pooled = stacked.reshape(-1, len(specs))

    for k, spec in enumerate(specs):
        col = pooled[:, k]
        kind = spec.support.kind
        if kind == "positive-real" and not np.all(col > 0):
            raise ValidationError(f"support violation in {spec.name!r}: non-positive draw")
        if kind == "positive-integer" and not (
            np.all(col >= 1) and np.all(col == np.round(col))
        ):
            raise ValidationError(f"support violation in {spec.name!r}: non-integral draw")
        if kind == "bounded" and not np.all((col > spec.support.lo) & (col < spec.support.hi)):
            raise ValidationError(f"support violation in {spec.name!r}: draw out of bounds")

    diagnostics: dict[str, ParamDiagnostics] = {}
    kept_per_chain = stacked.shape[1]
    for k, name in enumerate(names):
        chains_k = stacked[:, :, k]
        if kept_per_chain >= 4:
            diagnostics[name] = ParamDiagnostics(
                rhat=split_rhat(chains_k),
                ess=effective_sample_size(chains_k),
                degenerate=is_degenerate(chains_k),
            )
        else:
            diagnostics[name] = ParamDiagnostics(rhat=math.nan, ess=math.nan)

    return PosteriorSample(
        draws=pooled,
        parameter_names=tuple(names),
        diagnostics=diagnostics,
        provenance=config,
        warnings=tuple(warnings),
    )
