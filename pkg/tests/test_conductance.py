import numpy as np
import pytest

from volta.conductance import (
    ConductanceScheme,
    Network,
    assign,
    power_law_inverse_cdf,
    read_network,
    strength,
    write_network,
)
from volta.errors import DegenerateNetworkError, UndefinedStrengthError
from volta.generators import GenSpec, generate
from volta.graph import Graph


def test_unit_on_k4(k4):
    net = assign(k4, ConductanceScheme("unit"))
    assert np.all(net.conductance == 1.0)
    assert np.all(net.strengths == 3.0)


def test_power_law_inverse_cdf_values():
    assert power_law_inverse_cdf(0.0, 2.5) == 1.0
    assert power_law_inverse_cdf(0.75, 2.5) == pytest.approx(2.5198421, abs=1e-7)


def test_uniform01_mean():
    g = Graph(100_001, [(i, i + 1) for i in range(100_000)])
    net = assign(g, ConductanceScheme("uniform01", seed=5))
    assert net.conductance.min() > 1e-6 and net.conductance.max() < 1.0
    assert 0.497 <= net.conductance.mean() <= 0.503


def test_power_law_tail():
    g = Graph(100_001, [(i, i + 1) for i in range(100_000)])
    c = assign(g, ConductanceScheme("power_law", seed=6)).conductance
    assert c.min() >= 1.0
    # P(c > 4) = 4^-1.5 = 0.125; binomial 3 sigma over 1e5 edges
    tail = np.mean(c > 4.0)
    assert abs(tail - 0.125) <= 3 * np.sqrt(0.125 * 0.875 / 1e5)


def test_strength_examples():
    star = Graph(8, [(0, i) for i in range(1, 8)])
    assert strength(Network.unit(star), 0) == 7
    path = Network.from_edges(3, [(0, 1, 2.0), (1, 2, 1.0)])
    assert strength(path, 1) == 3.0
    with pytest.raises(UndefinedStrengthError):
        strength(Network.unit(Graph(3, [(0, 1)])), 2)


def test_strengths_sum_to_twice_total_conductance():
    g = generate(GenSpec("gnp", 200, 0.05, 1))
    net = assign(g, ConductanceScheme("power_law", seed=2))
    assert net.strengths.sum() == pytest.approx(2 * net.conductance.sum())
    for v in (0, 17, 199):
        expected = sum(net.conductance_between(v, int(u)) for u in g.neighbors(v))
        assert net.strengths[v] == pytest.approx(expected)


def test_determinism_and_scheme_names(k4):
    a = assign(k4, ConductanceScheme("powerlaw", seed=3))
    b = assign(k4, ConductanceScheme("power-law", seed=3))
    assert np.array_equal(a.conductance, b.conductance)
    assert a.scheme.kind == "power_law"
    with pytest.raises(ValueError):
        ConductanceScheme("lognormal")


def test_empty_edge_set_is_degenerate():
    with pytest.raises(DegenerateNetworkError):
        assign(Graph(4), ConductanceScheme("unit"))


def test_network_file_roundtrip(tmp_path):
    net = assign(generate(GenSpec("gnp", 30, 0.2, 3)), ConductanceScheme("uniform01", seed=4))
    write_network(net, tmp_path / "n.txt")
    back = read_network(tmp_path / "n.txt")
    assert back.graph == net.graph
    assert np.array_equal(back.conductance, net.conductance)
