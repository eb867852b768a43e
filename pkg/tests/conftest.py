import math

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from qcbench.circuit import Circuit, Gate, GateKind
from qcbench.synthesis import synthesize_2q

from oracle import haar_unitary

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

KINDS_1Q = (GateKind.H, GateKind.X, GateKind.T, GateKind.S, GateKind.Rz, GateKind.Rx, GateKind.Ry, GateKind.U3)
KINDS_2Q = (GateKind.CX, GateKind.CZ, GateKind.SWAP)
ANGLES = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


@st.composite
def circuits(draw, min_qubits=1, max_qubits=4, max_gates=25, kinds=KINDS_1Q + KINDS_2Q):
    n = draw(st.integers(min_qubits, max_qubits))
    allowed = [k for k in kinds if k.n_qubits <= n]
    gates = []
    for _ in range(draw(st.integers(0, max_gates))):
        kind = draw(st.sampled_from(allowed))
        qs = draw(st.permutations(range(n)))[: kind.n_qubits]
        params = tuple(draw(ANGLES) for _ in range(kind.n_params))
        gates.append(Gate(kind, tuple(qs), params))
    return Circuit(n, gates)


@pytest.fixture(scope="session")
def kak_template():
    """3-CX / 8-U3 synthesis of a Haar-random two-qubit unitary."""
    return synthesize_2q(haar_unitary(4, np.random.default_rng(2024)))
