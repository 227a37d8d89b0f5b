"""Damped non-isentropic Euler equations and their nonlinear diffusion limit."""

from .core import (
    BlowupError,
    DiffusionState,
    DomainError,
    GasParams,
    GasState,
    Grid,
    ReferenceConstants,
    RunResult,
    StateCorruptionError,
    eos_density,
    eos_pressure,
    reference_constants,
    to_conserved,
    to_primitive,
)

__version__ = "0.1.0"
