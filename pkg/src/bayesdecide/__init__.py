"""Bayesian decision analysis for wildlife management.

Fits state-space population models by adaptive MCMC, propagates posterior
uncertainty through forward stochastic simulation, and selects the action
maximizing Monte Carlo expected utility: a scalar harvest for a recovering
predator population, and a budget-constrained spatial allocation of trapping
effort for an invasive species.
"""

from .decisions import (
    ActionScore,
    DiscreteDecisionProblem,
    MCEstimate,
    SelectionResult,
    discrete_expected_utility,
    discrete_optimal_action,
    monte_carlo_expected_utility,
    select_optimal,
)
from .errors import BayesdecideError, DomainError, InitializationError, ValidationError
from .mcmc import (
    ChainConfig,
    ParameterSpec,
    PosteriorSample,
    Support,
    run_mcmc,
)

__version__ = "0.1.0"

__all__ = [
    "ActionScore",
    "BayesdecideError",
    "ChainConfig",
    "DiscreteDecisionProblem",
    "DomainError",
    "InitializationError",
    "MCEstimate",
    "ParameterSpec",
    "PosteriorSample",
    "SelectionResult",
    "Support",
    "ValidationError",
    "discrete_expected_utility",
    "discrete_optimal_action",
    "monte_carlo_expected_utility",
    "run_mcmc",
    "select_optimal",
    "__version__",
]
