"""Harmonic potentials, random walks and concentration on random electrical networks."""

from ._version import __version__
from .concentration import ConcentrationStats, ConsensusState, concentration_stats, consensus_run, predicted_constant
from .conductance import ConductanceScheme, Network, assign, read_network, strength, write_network
from .errors import (
    BudgetError,
    ConfigError,
    ConvergenceError,
    DefinednessError,
    DegenerateNetworkError,
    EmptyInteriorError,
    GraphError,
    ModelingError,
    UndefinedStrengthError,
    VoltaError,
    WalkError,
)
from .experiment import ExperimentConfig, RunManifest, StageError, recipe, run_experiment, sweep
from .generators import GenSpec, generate, p_from_alpha
from .graph import Graph, components, cycles_up_to, degree, read_graph, write_graph
from .properness import PropernessReport, audit, check_p1_p3, check_p4, check_p5
from .solver import BoundaryCondition, PotentialField, current_balance, solve, solve_dense
from .walks import HittingEstimate, MixingReport, TransitionModel, hitting_probabilities, mixing_diagnostics, step

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
