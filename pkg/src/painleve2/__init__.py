"""Coupled Painleve-II system: connection formulas, integration, fitting."""

from .model import (
    EquationParams,
    FinalAsymptotics,
    InitialAsymptotics,
    LaxPair,
    Trajectory,
    TrajectoryState,
    TransitionConstants,
)
from .specfun import arg_gamma_imag
from .connect import (
    AverageReport,
    apply_corrections,
    averaged_actions,
    connect_forward,
    connect_forward_scalar,
    spanning_tree_constant_c1,
    transition_constants,
)

__all__ = [
    "AverageReport",
    "EquationParams",
    "FinalAsymptotics",
    "InitialAsymptotics",
    "LaxPair",
    "Trajectory",
    "TrajectoryState",
    "TransitionConstants",
    "apply_corrections",
    "arg_gamma_imag",
    "averaged_actions",
    "connect_forward",
    "connect_forward_scalar",
    "spanning_tree_constant_c1",
    "transition_constants",
]

__version__ = "0.1.0"
