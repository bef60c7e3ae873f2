"""Exception types raised across the package."""

from __future__ import annotations


class VoltaError(Exception):
    """Base class for library errors."""


class GraphError(VoltaError, ValueError):
    """Malformed graph input (self-loop, duplicate edge, bad index)."""


class DegenerateNetworkError(VoltaError, ValueError):
    """A network cannot be built on a graph without edges."""


class UndefinedStrengthError(VoltaError, ValueError):
    """Vertex strength requested for an isolated vertex."""


class ModelingError(VoltaError, ValueError):
    """The electrical model is ill-posed for this input, e.g. an isolated boundary vertex."""


class ConvergenceError(VoltaError, RuntimeError):
    """An iteration ran out of budget before reaching its tolerance."""

    def __init__(self, message: str, best_residual: float, iterations: int):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


class WalkError(VoltaError, ValueError):
    """A random walk was asked to leave an isolated vertex."""


class DefinednessError(VoltaError, ValueError):
    """A walk start lies in a component that contains no boundary vertex."""


class BudgetError(VoltaError, RuntimeError):
    """The global step budget for a batch of walks was exhausted."""


class EmptyInteriorError(VoltaError, ValueError):
    """No defined interior vertex to compute statistics over."""


class ConfigError(VoltaError, ValueError):
    """Invalid experiment configuration."""
