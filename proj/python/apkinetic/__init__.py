"""Micro-macro kinetic solver, its Hamilton-Jacobi limit and the study drivers."""

from ._apkinetic import (
    ConfigError,
    InvariantViolation,
    NumericalOverflow,
    SolverError,
    UnsupportedError,
    ValidationError,
    experiment,
    experiment_names,
    hamiltonian,
    preset_names,
    run,
    speed_oracle,
)

__all__ = [
    "ConfigError",
    "InvariantViolation",
    "NumericalOverflow",
    "SolverError",
    "UnsupportedError",
    "ValidationError",
    "experiment",
    "experiment_names",
    "hamiltonian",
    "preset_names",
    "run",
    "speed_oracle",
]
