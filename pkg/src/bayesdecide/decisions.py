"""Model-agnostic expected-utility engine.

Two modes: exact expected utility for finite decision problems (weighted sum
over states), and Monte Carlo expected utility for continuous problems where
per-draw utilities come from posterior simulation. All functions are pure and
safe to call concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import DomainError, ValidationError

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDecisionProblem:
    """Finite states with probabilities, finite actions, complete utility table.

    ``utility[s, a]`` is the payoff of taking action ``a`` when the true state
    is ``s``. Probabilities must be non-negative and sum to 1 within
    ``PROB_SUM_TOL`` unless ``renormalize=True`` is passed, in which case they
    are rescaled on construction.
    """

    states: tuple[str, ...]
    state_probs: np.ndarray
    actions: tuple[str, ...]
    utility: np.ndarray

    def __init__(self, states, state_probs, actions, utility, renormalize: bool = False):
        states = tuple(str(s) for s in states)
        actions = tuple(str(a) for a in actions)
        probs = np.asarray(state_probs, dtype=float).copy()
        table = np.asarray(utility, dtype=float).copy()

        if len(states) == 0:
            raise ValidationError("at least one state is required")
        if len(actions) == 0:
            raise ValidationError("at least one action is required")
        if probs.shape != (len(states),):
            raise ValidationError(
                f"state_probs has shape {probs.shape}, expected ({len(states)},)"
            )
        if np.any(~np.isfinite(probs)) or np.any(probs < 0):
            raise ValidationError("state probabilities must be finite and >= 0")
        total = float(probs.sum())
        if renormalize:
            if total <= 0:
                raise ValidationError(f"cannot renormalize probabilities summing to {total}")
            probs = probs / total
        elif abs(total - 1.0) > PROB_SUM_TOL:
            raise ValidationError(
                f"state probabilities sum to {total!r}, not 1 (tolerance {PROB_SUM_TOL})"
            )
        if table.shape != (len(states), len(actions)):
            raise ValidationError(
                f"utility table has shape {table.shape}, expected "
                f"({len(states)}, {len(actions)})"
            )
        if np.any(~np.isfinite(table)):
            bad = np.argwhere(~np.isfinite(table))[0]
            raise ValidationError(
                f"utility table must be finite everywhere; first bad cell at "
                f"(state={states[bad[0]]!r}, action={actions[bad[1]]!r})"
            )

        probs.setflags(write=False)
        table.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "state_probs", probs)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "utility", table)


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo mean with its sampling standard error.

    ``degenerate`` marks estimates whose standard error is reported as 0
    because the sample was constant or contained a single draw.
    """

    mean: float
    std_error: float
    n_samples: int
    degenerate: bool = False

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValidationError("n_samples must be a positive integer")
        if not (self.std_error >= 0):
            raise ValidationError("std_error must be >= 0")


@dataclass(frozen=True)
class ActionScore:
    """One candidate action and its scored utility."""

    action_id: Any
    estimate: MCEstimate


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of picking the best-scoring action from a list.

    ``ambiguous`` is set when the runner-up mean lies within two combined
    standard errors of the winner, i.e. the optimum is not statistically
    separated at this Monte Carlo resolution.
    """

    best: ActionScore
    best_index: int
    ambiguous: bool
    runner_up_index: int | None = None


def discrete_expected_utility(problem: DiscreteDecisionProblem, action: str) -> float:
    """Exact expected utility of ``action``: sum over states of U(s, a) * p(s)."""
    try:
        j = problem.actions.index(str(action))
    except ValueError:
        raise DomainError(
            f"unknown action {action!r}; known actions: {list(problem.actions)}"
        ) from None
    return float(problem.utility[:, j] @ problem.state_probs)


def discrete_optimal_action(
    problem: DiscreteDecisionProblem,
) -> tuple[str, list[tuple[str, float]]]:
    """Return the expected-utility-maximizing action and the full EU list.

    Ties are broken by the lowest action index, so results are deterministic.
    """
    eus = [discrete_expected_utility(problem, a) for a in problem.actions]
    best = int(np.argmax(eus))
    return problem.actions[best], list(zip(problem.actions, eus))


def monte_carlo_expected_utility(draw_utilities: Sequence[float]) -> MCEstimate:
    """Estimate expected utility by averaging per-draw utilities.

    std_error is the sample standard deviation divided by sqrt(n); it is 0
    with the degenerate flag when all draws coincide or there is one draw.
    """
    values = np.asarray(draw_utilities, dtype=float)
    if values.ndim != 1:
        raise ValidationError("draw_utilities must be one-dimensional")
    n = values.size
    if n == 0:
        raise ValidationError("draw_utilities must be non-empty")
    finite = np.isfinite(values)
    if not finite.all():
        idx = int(np.flatnonzero(~finite)[0])
        raise ValidationError(f"non-finite utility at index {idx}: {values[idx]!r}")
    mean = float(values.mean())
    if n == 1 or np.all(values == values[0]):
        return MCEstimate(mean=mean, std_error=0.0, n_samples=n, degenerate=True)
    se = float(values.std(ddof=1) / np.sqrt(n))
    return MCEstimate(mean=mean, std_error=se, n_samples=n)


def select_optimal(scores: Sequence[ActionScore]) -> SelectionResult:
    """Pick the ActionScore with the highest mean (ties -> lowest index).

    Also reports whether the runner-up is within 2 combined standard errors
    of the winner, flagging a statistically ambiguous optimum.
    """
    scores = list(scores)
    if not scores:
        raise ValidationError("scores must be non-empty")
    ids = [s.action_id for s in scores]
    try:
        if len(set(ids)) != len(ids):
            raise ValidationError("action_id values must be unique within one report")
    except TypeError:
        pass  # unhashable descriptors: uniqueness is the caller's contract
    means = np.array([s.estimate.mean for s in scores])
    best = int(np.argmax(means))
    if len(scores) == 1:
        return SelectionResult(best=scores[0], best_index=0, ambiguous=False)
    others = [i for i in range(len(scores)) if i != best]
    runner = others[int(np.argmax(means[others]))]
    combined = np.hypot(scores[best].estimate.std_error, scores[runner].estimate.std_error)
    ambiguous = bool(means[best] - means[runner] < 2.0 * combined)
    return SelectionResult(
        best=scores[best], best_index=best, ambiguous=ambiguous, runner_up_index=runner
    )
