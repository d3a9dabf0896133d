"""Continuous weak measurement of a single qubit with purification feedback.

The package simulates the state of knowledge of a qubit under a continuous
z measurement, applies Hamiltonian feedback strategies between measurement
steps, and provides the closed-form, quadrature, and enumeration references
needed to check the simulations end to end.
"""

__version__ = "0.1.0"

from .bloch_core import BlochState, Rotation, azimuth, linear_entropy, polar_angle, rotate
from .errors import (
    BudgetExceededError,
    ConfigError,
    ConvergenceError,
    DegenerateAzimuthError,
    FeedbackDivergenceError,
    QuadratureError,
    StepTooLargeError,
    TargetUnreachableError,
)
from .measurement import (
    MeasurementStrength,
    StepOutcome,
    average_purification,
    measure_step,
    outcome_probabilities,
    strength_from_rate,
)
from .feedback import (
    FeedbackCommand,
    Strategy,
    alpha_schedule,
    apply_strategy,
    continuum_alpha,
    optimal_correction,
    run_discrete_protocol,
)
from .continuum_sde import SdeConfig, WienerIncrement, draw_wiener, sde_step, simulate_trajectory
from .analytics import (
    EntropyCurve,
    OptimalityReport,
    StrategyTree,
    classical_entropy_at,
    classical_entropy_curve,
    discrete_feedback_curve,
    feedback_entropy_curve,
    speedup_factor,
    speedup_factor_asymptotic,
    verify_optimality,
)
from .ensemble import EnsembleConfig, EnsembleStats, derive_stream, run_ensemble

__all__ = [
    "BlochState",
    "BudgetExceededError",
    "ConfigError",
    "ConvergenceError",
    "DegenerateAzimuthError",
    "EnsembleConfig",
    "EnsembleStats",
    "EntropyCurve",
    "FeedbackCommand",
    "FeedbackDivergenceError",
    "MeasurementStrength",
    "OptimalityReport",
    "QuadratureError",
    "Rotation",
    "SdeConfig",
    "StepOutcome",
    "StepTooLargeError",
    "Strategy",
    "StrategyTree",
    "TargetUnreachableError",
    "WienerIncrement",
    "alpha_schedule",
    "apply_strategy",
    "average_purification",
    "azimuth",
    "classical_entropy_at",
    "classical_entropy_curve",
    "continuum_alpha",
    "derive_stream",
    "discrete_feedback_curve",
    "draw_wiener",
    "feedback_entropy_curve",
    "linear_entropy",
    "measure_step",
    "optimal_correction",
    "outcome_probabilities",
    "polar_angle",
    "rotate",
    "run_discrete_protocol",
    "run_ensemble",
    "sde_step",
    "simulate_trajectory",
    "speedup_factor",
    "speedup_factor_asymptotic",
    "strength_from_rate",
    "verify_optimality",
]
