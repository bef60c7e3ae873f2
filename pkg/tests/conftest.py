from __future__ import annotations

import numpy as np
import pytest

from volta.conductance import ConductanceScheme, Network, assign
from volta.generators import GenSpec, generate
from volta.graph import Graph
from volta.rng import derive_seed
from volta.solver import BoundaryCondition

# criterion lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def path_network(c_am: float = 2.0, c_mb: float = 1.0) -> Network:
    """a=0, m=1, b=2."""
    return Network.from_edges(3, [(0, 1, c_am), (1, 2, c_mb)])


def random_instance(index: int, n_max: int = 50, k_max: int = 4) -> tuple[Network, BoundaryCondition]:
    """Small mixed instance: generator and scheme cycle with ``index``."""
    rng = np.random.default_rng(derive_seed(77, index))
    kind = ("gnp", "circle", "small_world")[index % 3]
    scheme = ("unit", "uniform01", "power_law")[(index // 3) % 3]
    n = int(rng.integers(5, n_max + 1))
    p = {"gnp": rng.uniform(0.1, 0.4), "circle": 0.0, "small_world": rng.uniform(0.02, 0.15)}[kind]
    g = generate(GenSpec(kind, n, p, derive_seed(77, index, 1)))
    while g.edge_count == 0:
        g = generate(GenSpec(kind, n, min(1.0, p * 2), derive_seed(77, index, 2)))
        p *= 2
    net = assign(g, ConductanceScheme(scheme, derive_seed(77, index, 3)))
    candidates = np.flatnonzero(g.degrees() > 0)
    k = int(rng.integers(1, min(k_max, len(candidates)) + 1))
    verts = rng.choice(candidates, size=k, replace=False)
    pots = rng.uniform(0.0, 1.0, size=k)
    return net, BoundaryCondition(verts.tolist(), pots.tolist())


@pytest.fixture
def path_net() -> Network:
    return path_network()


@pytest.fixture
def k4() -> Graph:
    return Graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
