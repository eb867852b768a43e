import math

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcbench.circuit import Circuit, GateKind, gate
from qcbench.hardware import (
    PRESET_NAMES,
    CouplingGraph,
    HardwareError,
    HardwareSpec,
    k_regular_graph,
    parse_edge_list,
    preset,
    validate_connectivity,
)


def test_preset_mock_ibm():
    hw = preset("mock-ibm-all2all-10q")
    assert (hw.f1q, hw.f2q, hw.depth_penalty_k) == (0.9990, 0.990, 0.995)
    assert hw.gate_set.kinds() == {GateKind.CX, GateKind.U3}
    assert hw.coupling is None and hw.is_all_to_all


def test_preset_ionq():
    hw = preset("ionq-32q")
    assert (hw.f1q, hw.f2q, hw.depth_penalty_k) == (0.9998, 0.990, 0.995)
    assert hw.gate_set.kinds() == {GateKind.XX, GateKind.Rz, GateKind.Rx}
    assert hw.is_all_to_all


def test_preset_rigetti_constrains_rx():
    gs = preset("rigetti-aspen-16q").gate_set
    assert gate("rx", 0, params=[math.pi / 2]) in gs
    assert gate("rx", 0, params=[-math.pi]) in gs
    assert gate("rx", 0, params=[0.2]) not in gs


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_connected_and_sized(name):
    hw = preset(name)
    assert hw.graph().n_nodes == hw.n_qubits
    assert hw.graph().is_connected()


def test_unknown_preset():
    with pytest.raises(HardwareError, match="known"):
        preset("nope")


def test_k_regular_complete():
    g = k_regular_graph(16, 15)
    assert g.is_complete() and len(g.edges) == 120


def test_k_regular_ring():
    g = k_regular_graph(16, 2, seed=3)
    nxg = g.to_networkx()
    assert nx.is_connected(nxg)
    assert sorted(len(c) for c in nx.cycle_basis(nxg)) == [16]


@given(st.integers(4, 14), st.integers(2, 13), st.integers(0, 1000))
def test_k_regular_degrees(n, k, seed):
    if k >= n or (n * k) % 2:
        with pytest.raises(HardwareError):
            k_regular_graph(n, k, seed)
        return
    g = k_regular_graph(n, k, seed)
    # incidence count oracle, independent of CouplingGraph.degrees
    deg = [0] * n
    for a, b in g.edges:
        deg[a] += 1
        deg[b] += 1
    assert deg == [k] * n
    assert g.is_connected()


def test_k_regular_six_three():
    assert k_regular_graph(6, 3, seed=0).degrees() == [3] * 6


def test_k_regular_deterministic():
    assert k_regular_graph(16, 4, seed=7) == k_regular_graph(16, 4, seed=7)


def test_validate_connectivity_examples():
    line = CouplingGraph.from_edges(3, [(0, 1), (1, 2)])
    assert validate_connectivity(Circuit(3, [gate("cx", 0, 2)]), line) == [0]
    assert validate_connectivity(Circuit(3, [gate("cx", 2, 0), gate("cx", 1, 0)]), None) == []
    directed = CouplingGraph.from_edges(2, [(0, 1)], directed=True)
    assert validate_connectivity(Circuit(2, [gate("cx", 1, 0)]), directed) == [0]
    assert validate_connectivity(Circuit(2, [gate("cz", 1, 0)]), directed) == []


def test_validate_connectivity_all_to_all_spec():
    hw = preset("ionq-32q")
    assert validate_connectivity(Circuit(5, [gate("cx", 0, 4), gate("swap", 3, 1)]), hw) == []


def test_coupling_rejects_bad_edges():
    with pytest.raises(HardwareError):
        CouplingGraph.from_edges(3, [(0, 0)])
    with pytest.raises(HardwareError):
        CouplingGraph.from_edges(3, [(0, 3)])


def test_fidelity_range_checked():
    hw = preset("mock-ibm-all2all-10q")
    d = hw.to_dict()
    d["f2q"] = 1.2
    with pytest.raises(HardwareError):
        HardwareSpec.from_dict(d)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_json_round_trip(name):
    hw = preset(name)
    assert HardwareSpec.from_json(hw.to_json()) == hw


def test_distance_matrix_line():
    d = CouplingGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)]).distance_matrix()
    assert d[0, 3] == 3 and d[3, 1] == 2


def test_parse_edge_list():
    assert parse_edge_list("# ring\n0 1\n1 2  # tail\n\n2 0\n") == [(0, 1), (1, 2), (2, 0)]
    with pytest.raises(HardwareError, match="line 1"):
        parse_edge_list("0-1\n")
