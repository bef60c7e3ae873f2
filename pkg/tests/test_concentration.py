import numpy as np
import pytest

from conftest import path_network
from volta.concentration import concentration_stats, consensus_run, predicted_constant
from volta.conductance import ConductanceScheme, Network, assign
from volta.errors import ConvergenceError, EmptyInteriorError, ModelingError
from volta.files import field_csv, read_field_csv
from volta.generators import GenSpec, generate
from volta.graph import Graph
from volta.solver import BoundaryCondition, PotentialField, solve

FOUR_PINS = BoundaryCondition.parse("1:1.0,251:0.3,501:0.7,751:1.0")


def degrees_12_and_8():
    # vertex 0 sees leaves 2..13, vertex 1 sees leaves 2..9
    edges = [(0, v) for v in range(2, 14)] + [(1, v) for v in range(2, 10)]
    return Network.unit(Graph(14, edges))


def test_predicted_constant_examples():
    net = degrees_12_and_8()
    assert predicted_constant(net, BoundaryCondition([0, 1], [0.6, 0.6])) == pytest.approx(0.6)
    assert predicted_constant(net, BoundaryCondition([0, 1], [1.0, 0.0])) == pytest.approx(12 / 20)
    hub = Network.from_edges(5, [(0, 4, 10.0), (1, 4, 9.0), (2, 4, 11.0), (3, 4, 10.0)])
    bc = BoundaryCondition([0, 1, 2, 3], [1.0, 0.3, 0.7, 1.0])
    assert predicted_constant(hub, bc) == pytest.approx(0.76)


@pytest.mark.parametrize("lam", [0.5, 3.0])
def test_predicted_constant_scale_invariant(lam):
    net = assign(generate(GenSpec("gnp", 1000, 0.01, 3)), ConductanceScheme("power_law", seed=4))
    assert predicted_constant(net.scaled(lam), FOUR_PINS) == pytest.approx(predicted_constant(net, FOUR_PINS), rel=1e-14)


def test_isolated_boundary_is_modeling_error():
    net = Network.unit(Graph(4, [(0, 1), (1, 2)]))
    with pytest.raises(ModelingError):
        predicted_constant(net, BoundaryCondition([0, 3], [1.0, 0.0]))


def test_stats_constant_field():
    net = Network.unit(Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]))
    bc = BoundaryCondition([0, 2], [0.62, 0.62])
    st = concentration_stats(solve(net, bc), net, bc, bins=50)
    assert st.max_dev == pytest.approx(0.0, abs=1e-10)
    assert st.v_bar_c == pytest.approx(0.62)
    assert sorted(st.histogram)[-1] == st.interior_count == 3
    assert len(st.bin_edges) == 51


def test_stats_empty_interior(path_net):
    bc = BoundaryCondition([0, 1, 2], [1.0, 0.5, 0.0])
    with pytest.raises(EmptyInteriorError):
        concentration_stats(solve(path_net, bc), path_net, bc)


def test_circle_does_not_concentrate():
    n = 1000
    net = Network.unit(Graph(n, [(i, (i + 1) % n) for i in range(n)]))
    st = concentration_stats(solve(net, FOUR_PINS), net, FOUR_PINS)
    assert st.max_dev >= 0.25


def test_gnp_concentrates():
    net = Network.unit(generate(GenSpec("gnp", 1000, 0.01, 11)))
    st = concentration_stats(solve(net, FOUR_PINS), net, FOUR_PINS)
    assert st.max_dev <= 0.15


def test_consensus_from_fixed_point():
    net = assign(generate(GenSpec("gnp", 100, 0.08, 2)), ConductanceScheme("uniform01", seed=3))
    bc = BoundaryCondition([0, 50], [1.0, 0.0])
    f = solve(net, bc, tol=1e-13)
    with pytest.raises(ConvergenceError) as err:
        consensus_run(net, bc, tol=1e-10, max_steps=1, initial=np.nan_to_num(f.values))
    assert err.value.best_residual <= 1e-10
    state, _ = consensus_run(net, bc, tol=1e-10, initial=np.nan_to_num(f.values))
    # the stopping rule needs one full 16-step window of deltas
    assert state.t <= 18


def test_consensus_path():
    net = path_network(1.0, 1.0)
    state, f = consensus_run(net, BoundaryCondition([0, 2], [1.0, 0.0]))
    assert f.values[1] == pytest.approx(0.5, abs=1e-10)
    assert state.hull_ok


def test_consensus_matches_solver_on_gnp_1000():
    net = Network.unit(generate(GenSpec("gnp", 1000, 0.01, 12)))
    state, f = consensus_run(net, FOUR_PINS)
    ref = solve(net, FOUR_PINS)
    assert np.nanmax(np.abs(f.values - ref.values)) <= 1e-8
    assert state.hull_ok and f.method == "consensus"


def test_field_type_roundtrip_through_csv(tmp_path):
    f = PotentialField(np.array([1.0, np.nan, 0.25]), np.array([True, False, True]), 0.0, 1)
    (tmp_path / "f.csv").write_text(field_csv(f))
    back = read_field_csv(tmp_path / "f.csv")
    assert back.defined.tolist() == [True, False, True]
    assert back.values[2] == 0.25 and np.isnan(back.values[1])
