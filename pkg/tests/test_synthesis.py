import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcbench.circuit import Circuit, Gate, GateKind, depth, gate, gate_count
from qcbench.synthesis import (
    DecompositionError,
    NonUnitaryError,
    circuit_unitary,
    euler_zxz,
    gate_matrix,
    is_identity_up_to_phase,
    kak_decompose,
    num_cx_required,
    rx,
    rz,
    rz_rx_refine,
    synthesize_2q,
    u3,
    u3_from_matrix,
    unitary_fidelity,
)

import oracle
from conftest import circuits

SEEDS = st.integers(0, 2**32 - 1)
CX = oracle.gate_unitary(2, "cx", (0, 1))
SWAP = oracle.gate_unitary(2, "swap", (0, 1))


def test_unitary_examples():
    assert np.allclose(circuit_unitary(Circuit(1)), np.eye(2))
    assert np.allclose(circuit_unitary(Circuit(1, [gate("x", 0)])), [[0, 1], [1, 0]])
    bell = circuit_unitary(Circuit(2, [gate("h", 0), gate("cx", 0, 1)]))
    assert np.allclose(bell[:, 0], np.array([1, 0, 0, 1]) / math.sqrt(2))


@given(circuits(max_qubits=4, kinds=tuple(k for k in GateKind if k.is_unitary)))
def test_unitary_matches_oracle(c):
    assert np.allclose(circuit_unitary(c), oracle.unitary(c), atol=1e-12)


@pytest.mark.parametrize("kind", [k for k in GateKind if k.is_unitary])
def test_gate_matrix_matches_oracle(kind):
    params = (0.3, -1.1, 2.2)[: kind.n_params]
    g = Gate(kind, tuple(range(kind.n_qubits)), params)
    assert np.allclose(gate_matrix(g), oracle.gate_unitary(kind.n_qubits, kind.value, g.qubits, params))


def test_fidelity_examples():
    u = oracle.haar_unitary(4, np.random.default_rng(1))
    assert unitary_fidelity(u, u) == pytest.approx(1.0)
    assert unitary_fidelity(u, np.exp(1j * math.pi / 7) * u) == pytest.approx(1.0)
    assert unitary_fidelity(np.eye(2), oracle.X) == 0.0


def test_euler_identity():
    a, t, b, ph = euler_zxz(np.eye(2))
    assert t == pytest.approx(0) and wrap0(a + b) and wrap0(ph)


def wrap0(x):
    return abs(math.remainder(x, 2 * math.pi)) < 1e-12


def test_euler_rx():
    a, t, b, ph = euler_zxz(oracle.rx(0.7))
    assert (t, a, b, ph) == pytest.approx((0.7, 0, 0, 0), abs=1e-12)


def test_euler_hadamard():
    a, t, b, ph = euler_zxz(oracle.H)
    assert (a, t, b, ph) == pytest.approx((math.pi / 2,) * 4)
    rec = np.exp(1j * ph) * oracle.rz(b) @ oracle.rx(t) @ oracle.rz(a)
    assert np.allclose(rec, oracle.H)


@given(SEEDS)
def test_euler_reconstructs(seed):
    u = oracle.haar_unitary(2, np.random.default_rng(seed))
    a, t, b, ph = euler_zxz(u)
    assert 0 <= t <= math.pi
    assert np.allclose(np.exp(1j * ph) * rz(b) @ rx(t) @ rz(a), u, atol=1e-10)


@given(SEEDS)
def test_u3_from_matrix(seed):
    u = oracle.haar_unitary(2, np.random.default_rng(seed))
    assert unitary_fidelity(u3(*u3_from_matrix(u)), u) == pytest.approx(1.0, abs=1e-12)


def test_non_unitary_rejected():
    with pytest.raises(NonUnitaryError):
        euler_zxz(np.array([[1, 1], [0, 1]]))


@pytest.mark.parametrize(
    "u, weyl",
    [(np.eye(4), (0, 0, 0)), (CX, (math.pi / 4, 0, 0)), (SWAP, (math.pi / 4,) * 3)],
    ids=["identity", "cx", "swap"],
)
def test_weyl_coordinates(u, weyl):
    assert kak_decompose(u).weyl.as_tuple() == pytest.approx(weyl, abs=1e-9)


@given(SEEDS)
def test_kak_reconstructs_in_chamber(seed):
    u = oracle.haar_unitary(4, np.random.default_rng(seed))
    k = kak_decompose(u)
    assert k.weyl.in_chamber()
    assert np.allclose(k.unitary(), u, atol=1e-9)
    for m in (k.a0, k.a1, k.b0, k.b1):
        assert np.allclose(m @ m.conj().T, np.eye(2), atol=1e-9)


@given(SEEDS)
def test_weyl_invariant_under_local_dressing(seed):
    rng = np.random.default_rng(seed)
    u = oracle.haar_unitary(4, rng)
    left = np.kron(oracle.haar_unitary(2, rng), oracle.haar_unitary(2, rng))
    right = np.kron(oracle.haar_unitary(2, rng), oracle.haar_unitary(2, rng))
    w0 = kak_decompose(u).weyl.as_tuple()
    w1 = kak_decompose(left @ u @ right).weyl.as_tuple()
    assert w1 == pytest.approx(w0, abs=1e-7)


def test_num_cx_required():
    assert num_cx_required(kak_decompose(np.eye(4)).weyl) == 0
    assert num_cx_required(kak_decompose(CX).weyl) == 1
    assert num_cx_required(kak_decompose(SWAP).weyl) == 3
    two = oracle.unitary(Circuit(2, [gate("cx", 0, 1), gate("rx", 0, params=[0.3]),
                                     gate("rz", 1, params=[0.8]), gate("cx", 0, 1)]))
    assert num_cx_required(kak_decompose(two).weyl) == 2


@given(SEEDS)
def test_synthesize_generic(seed):
    u = oracle.haar_unitary(4, np.random.default_rng(seed))
    c = synthesize_2q(u)
    assert (gate_count(c, "cx"), gate_count(c, "u3"), depth(c)) == (3, 8, 7)
    assert oracle.phase_distance(u, oracle.unitary(c)) < 1e-9


def test_synthesize_cx():
    c = synthesize_2q(CX)
    assert gate_count(c, "cx") == 1
    assert all(is_identity_up_to_phase(gate_matrix(g)) for g in c.gates if g.kind is GateKind.U3)
    assert oracle.phase_distance(CX, oracle.unitary(c)) < 1e-12


@given(SEEDS)
def test_synthesize_local(seed):
    rng = np.random.default_rng(seed)
    u = np.kron(oracle.haar_unitary(2, rng), oracle.haar_unitary(2, rng))
    c = synthesize_2q(u)
    assert gate_count(c, "cx") == 0 and gate_count(c, "u3") <= 2
    assert oracle.phase_distance(u, oracle.unitary(c)) < 1e-9


def test_synthesize_rejects_non_unitary():
    with pytest.raises((NonUnitaryError, DecompositionError)):
        synthesize_2q(np.ones((4, 4)))


def test_rz_rx_refine_rotation_count(kak_template, capsys):
    out = rz_rx_refine(kak_template)
    n_rot = gate_count(out, "rz") + gate_count(out, "rx")
    with capsys.disabled():
        print(f"\nrz_rx_refine on a generic KAK circuit: gc(Rz,Rx) = {n_rot}, gc(CX) = {gate_count(out, 'cx')}")
    assert {g.kind for g in out.gates} <= {GateKind.CX, GateKind.Rz, GateKind.Rx}
    assert gate_count(out, "cx") == 3
    assert n_rot <= 17
    assert oracle.phase_distance(oracle.unitary(kak_template), oracle.unitary(out)) < 1e-9
