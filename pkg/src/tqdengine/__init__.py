"""Steady-state transport and thermodynamics of a triple quantum dot whose
central dot is continuously monitored by a detector."""
from .analysis import (
    InvalidSpec,
    NoEngineRegion,
    NoRootInBracket,
    RegimeLabel,
    SweepResult,
    SweepSpec,
    classify,
    find_decoupling_bias,
    find_stall_voltage,
    sweep,
)
from .dynamics import (
    DegenerateSteadyState,
    Generator,
    NonConvergence,
    StateVector,
    build_generator,
    evolve,
    steady_state,
)
from .model import DegenerateDetuning, EigenStructure, InvalidParameter, ModelParams, diagonalize, validate
from .observables import ApproximationOutOfRange, Observables, compute_observables, solve, solve_batch
from .presets import PRESETS, preset
from .rates import RateSet, golden_rule_rates

__version__ = "0.1.0"

__all__ = [
    "ApproximationOutOfRange",
    "build_generator",
    "classify",
    "compute_observables",
    "DegenerateDetuning",
    "DegenerateSteadyState",
    "diagonalize",
    "EigenStructure",
    "evolve",
    "find_decoupling_bias",
    "find_stall_voltage",
    "Generator",
    "golden_rule_rates",
    "InvalidParameter",
    "InvalidSpec",
    "ModelParams",
    "NoEngineRegion",
    "NonConvergence",
    "NoRootInBracket",
    "Observables",
    "preset",
    "PRESETS",
    "RateSet",
    "RegimeLabel",
    "solve",
    "solve_batch",
    "StateVector",
    "steady_state",
    "sweep",
    "SweepResult",
    "SweepSpec",
    "validate",
]
