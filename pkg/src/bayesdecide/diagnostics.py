"""Chain convergence diagnostics: split R-hat and autocorrelation-based ESS."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError


def _select(chains: np.ndarray, param_index: int | None) -> np.ndarray:
    """Reduce input to a (n_chains, n_draws) matrix for one parameter."""
    arr = np.asarray(chains, dtype=float)
    if arr.ndim == 3:
        if param_index is None:
            raise ValidationError("param_index is required for 3-d chain input")
        arr = arr[:, :, param_index]
    if arr.ndim != 2:
        raise ValidationError("chains must be (n_chains, n_draws) or (n_chains, n_draws, n_params)")
    if arr.shape[0] < 2:
        raise ValidationError("at least 2 chains are required")
    if arr.shape[1] < 4:
        raise ValidationError("each chain needs at least 4 draws")
    return arr


def is_degenerate(chains: np.ndarray, param_index: int | None = None) -> bool:
    """True when every chain has zero within-chain variance."""
    arr = _select(chains, param_index)
    return bool(np.all(arr.var(axis=1) == 0.0))


def split_rhat(chains: np.ndarray, param_index: int | None = None) -> float:
    """Split Gelman-Rubin statistic sqrt(V_hat / W).

    Each chain is split in half (middle draw dropped for odd lengths) and the
    standard between/within variance ratio is computed on the 2m half-chains.
    Degenerate input (all chains constant) returns exactly 1.0; callers that
    need the flag should also check :func:`is_degenerate`.
    """
    arr = _select(chains, param_index)
    if np.all(arr.var(axis=1) == 0.0):
        return 1.0
    half = arr.shape[1] // 2
    splits = np.concatenate([arr[:, :half], arr[:, -half:]], axis=0)
    n = half
    chain_means = splits.mean(axis=1)
    w = float(splits.var(axis=1, ddof=1).mean())
    b = n * float(chain_means.var(ddof=1))
    if w == 0.0:
        return np.inf if b > 0 else 1.0
    var_hat = (n - 1) / n * w + b / n
    return float(np.sqrt(var_hat / w))


def _chain_autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of a single chain at all lags, via FFT."""
    n = x.size
    centered = x - x.mean()
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(centered, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[:n].real
    return acov / n


def effective_sample_size(chains: np.ndarray, param_index: int | None = None) -> float:
    """Autocorrelation-based ESS with Geyer initial-monotone truncation.

    Combines per-chain autocovariances with the pooled variance estimate,
    sums paired autocorrelations while they stay positive and monotone, and
    clamps the result to (0, 1.05 * total draws]. Constant chains return the
    total draw count (check :func:`is_degenerate` for the flag).
    """
    arr = _select(chains, param_index)
    m, n = arr.shape
    total = m * n
    if np.all(arr.var(axis=1) == 0.0):
        return float(total)

    within = float(arr.var(axis=1, ddof=1).mean())
    b = n * float(arr.mean(axis=1).var(ddof=1))
    var_hat = (n - 1) / n * within + b / n
    if var_hat <= 0:
        return float(total)

    acov = np.stack([_chain_autocovariance(arr[c]) for c in range(m)])
    rho = 1.0 - (within - acov.mean(axis=0)) / var_hat
    rho[0] = 1.0

    # Geyer: sum rho over pairs (2k, 2k+1) while pair sums are positive,
    # enforcing a non-increasing sequence of pair sums.
    max_pairs = (n - 1) // 2
    tau = 0.0
    prev_pair = np.inf
    used_any = False
    for k in range(max_pairs):
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair <= 0:
            break
        pair = min(pair, prev_pair)
        tau += pair
        prev_pair = pair
        used_any = True
    if not used_any:
        tau = 1.0
    tau = 2.0 * tau - 1.0
    tau = max(tau, 1.0 / total)  # keep ESS finite and positive
    ess = total / tau
    return float(min(ess, 1.05 * total))
