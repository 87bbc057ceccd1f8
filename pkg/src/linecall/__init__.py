"""Rational-inattention analysis of line-call umpiring under AI oversight."""

from .core import (
    Action,
    AttentionCost,
    InformationStructure,
    Posterior,
    Prior,
    State,
    UtilityEnvironment,
    gross_utility,
    shannon_cost,
    validate_information_structure,
)
from .errors import ConfigError, DataFormatError, LinecallError, NumericalError
from .estimation import (
    EstimationConvention,
    PenaltyEstimate,
    RevealedPosteriors,
    estimate_kappa,
    estimate_penalties,
    penalty_from_log_gap,
    revealed_posteriors,
    two_stage_pipeline,
)
from .revealed import (
    BoundDirection,
    BoundSource,
    ChoiceData,
    PenaltyBound,
    Regime,
    niac_bound,
    nias_check,
    nias_penalty_bounds,
    penalty_region,
)
from .solver import (
    SolutionRegime,
    SolverSolution,
    brute_force_oracle,
    ilr_residuals,
    predicted_choice_data,
    solve_ilr_posteriors,
    solve_optimal_structure,
)

__version__ = "1.0.0"

__all__ = [
    "Action",
    "AttentionCost",
    "BoundDirection",
    "BoundSource",
    "ChoiceData",
    "ConfigError",
    "DataFormatError",
    "EstimationConvention",
    "InformationStructure",
    "LinecallError",
    "NumericalError",
    "PenaltyBound",
    "PenaltyEstimate",
    "Posterior",
    "Prior",
    "Regime",
    "RevealedPosteriors",
    "SolutionRegime",
    "SolverSolution",
    "State",
    "UtilityEnvironment",
    "brute_force_oracle",
    "estimate_kappa",
    "estimate_penalties",
    "gross_utility",
    "ilr_residuals",
    "niac_bound",
    "nias_check",
    "nias_penalty_bounds",
    "penalty_from_log_gap",
    "penalty_region",
    "predicted_choice_data",
    "revealed_posteriors",
    "shannon_cost",
    "solve_ilr_posteriors",
    "solve_optimal_structure",
    "two_stage_pipeline",
    "validate_information_structure",
]
