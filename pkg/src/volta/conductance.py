"""Edge conductances and the electrical network they define.

Three schemes are supported:

* ``unit``      every conductance is 1;
* ``uniform01`` i.i.d. uniform on ``[eps, 1)``;
* ``power_law`` Pareto with scale 1 and density proportional to ``x**-gamma``
  on ``[1, inf)``, sampled by inverting the CDF.

Random draws are consumed in canonical (sorted) edge order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from numba import njit

from .errors import DegenerateNetworkError, GraphError, UndefinedStrengthError
from .graph import Graph
from .rng import generator

__all__ = [
    "SCHEMES",
    "ConductanceScheme",
    "Network",
    "assign",
    "strength",
    "power_law_inverse_cdf",
    "read_network",
    "write_network",
]

SCHEMES = ("unit", "uniform01", "power_law")


@dataclass(frozen=True)
class ConductanceScheme:
    kind: str = "unit"
    seed: int = 0
    gamma: float = 2.5
    epsilon: float = 1e-6

    def __post_init__(self):
        kind = self.kind.replace("-", "_")
        if kind == "powerlaw":
            kind = "power_law"
        if kind not in SCHEMES:
            raise ValueError(f"unknown conductance scheme {self.kind!r}; expected one of {SCHEMES}")
        object.__setattr__(self, "kind", kind)
        if not self.gamma > 1:
            raise ValueError(f"power-law exponent must exceed 1, got {self.gamma}")
        if self.epsilon < 0 or self.epsilon >= 1:
            raise ValueError(f"uniform floor must lie in [0, 1), got {self.epsilon}")
        if self.epsilon == 0 and kind == "uniform01":
            warnings.warn("uniform01 with epsilon=0 can produce zero conductances", stacklevel=3)


def power_law_inverse_cdf(u, gamma: float = 2.5):
    """Map uniform ``u`` in [0, 1) to a Pareto(scale 1, tail gamma-1) sample."""
    return (1.0 - np.asarray(u, dtype=float)) ** (-1.0 / (gamma - 1.0))


@njit(cache=True)
def _row_sums(indptr, weights):
    n = indptr.shape[0] - 1
    out = np.zeros(n)
    for i in range(n):
        s = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            s += weights[k]
        out[i] = s
    return out


class Network:
    """A graph with a positive conductance on every edge.

    Attributes:
        graph: the underlying :class:`Graph`.
        conductance: per-edge conductances aligned with ``graph.edges``.
        weights: the same values laid out along CSR adjacency rows.
        strengths: per-vertex sum of incident conductances (0 if isolated).
        scheme: the scheme that produced the conductances, if any.
    """

    __slots__ = ("graph", "conductance", "weights", "strengths", "scheme")

    def __init__(self, graph: Graph, conductance, scheme: ConductanceScheme | None = None):
        c = np.array(conductance, dtype=float)
        if c.shape != (graph.edge_count,):
            raise ValueError(f"expected {graph.edge_count} conductances, got shape {c.shape}")
        if graph.edge_count == 0:
            raise DegenerateNetworkError("network needs at least one edge")
        if np.any(~np.isfinite(c)) or np.any(c < 0):
            raise ValueError("conductances must be finite and non-negative")
        self.graph = graph
        self.conductance = c
        self.weights = c[graph.edge_ids]
        self.strengths = _row_sums(graph.indptr, self.weights)
        self.scheme = scheme
        for a in (self.conductance, self.weights, self.strengths):
            a.flags.writeable = False

    @classmethod
    def unit(cls, graph: Graph) -> Network:
        return cls(graph, np.ones(graph.edge_count), ConductanceScheme("unit"))

    @classmethod
    def from_edges(cls, n: int, triples: Iterable[tuple[int, int, float]]) -> Network:
        """Build from ``(i, j, c_ij)`` triples in any order."""
        triples = list(triples)
        g = Graph(n, [(i, j) for i, j, _ in triples])
        lookup = {(min(i, j), max(i, j)): c for i, j, c in triples}
        return cls(g, [lookup[(int(i), int(j))] for i, j in g.edges])

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def bounds(self) -> tuple[float, float]:
        """Observed ``(C_1, C_2)``: smallest and largest conductance."""
        return float(self.conductance.min()), float(self.conductance.max())

    def conductance_between(self, i: int, j: int) -> float:
        g = self.graph
        lo, hi = g.indptr[i], g.indptr[i + 1]
        k = lo + np.searchsorted(g.indices[lo:hi], j)
        if k >= hi or g.indices[k] != j:
            raise KeyError(f"no edge ({i}, {j})")
        return float(self.weights[k])

    def scaled(self, factor: float) -> Network:
        return Network(self.graph, self.conductance * factor, self.scheme)

    def induced(self, vertices) -> tuple[Network, np.ndarray]:
        """Subnetwork on ``vertices``; returns it with the original labels."""
        sub, labels = self.graph.induced(vertices)
        keep = np.zeros(self.n, dtype=bool)
        keep[labels] = True
        mask = keep[self.graph.edges[:, 0]] & keep[self.graph.edges[:, 1]]
        if not mask.any():
            raise DegenerateNetworkError("induced subnetwork has no edges")
        return Network(sub, self.conductance[mask], self.scheme), labels


def assign(g: Graph, scheme: ConductanceScheme) -> Network:
    if g.edge_count == 0:
        raise DegenerateNetworkError("cannot assign conductances to a graph with no edges")
    m = g.edge_count
    if scheme.kind == "unit":
        c = np.ones(m)
    else:
        u = generator(scheme.seed).random(m)
        if scheme.kind == "uniform01":
            c = scheme.epsilon + (1.0 - scheme.epsilon) * u
        else:
            c = power_law_inverse_cdf(u, scheme.gamma)
    return Network(g, c, scheme)


def strength(net: Network, v: int) -> float:
    v = net.graph._check(v)
    if net.graph.degree(v) == 0:
        raise UndefinedStrengthError(f"vertex {v} is isolated; its strength is undefined")
    return float(net.strengths[v])


def read_network(path: str | Path) -> Network:
    """Load the 1-based ``n m`` / ``i j c_ij`` text format."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise GraphError(f"{path}: empty network file")
    n, m = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != m:
        raise GraphError(f"{path}: header says {m} edges, found {len(body)}")
    return Network.from_edges(n, [(int(a) - 1, int(b) - 1, float(c)) for a, b, c in body])


def format_network(net: Network) -> str:
    rows = [f"{net.n} {net.graph.edge_count}"]
    rows.extend(f"{i + 1} {j + 1} {c:.17g}" for (i, j), c in zip(net.graph.edges, net.conductance))
    return "\n".join(rows) + "\n"


def write_network(net: Network, path: str | Path) -> None:
    Path(path).write_text(format_network(net))
