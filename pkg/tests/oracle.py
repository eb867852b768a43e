"""Independent reference implementation: dense Kronecker-product matrices
built from textbook gate definitions, no code shared with qcbench."""

from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)


def rx(t):
    return np.cos(t / 2) * I2 - 1j * np.sin(t / 2) * X


def ry(t):
    return np.cos(t / 2) * I2 - 1j * np.sin(t / 2) * Y


def rz(t):
    return np.cos(t / 2) * I2 - 1j * np.sin(t / 2) * Z


def u3(theta, phi, lam):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]])


ONE_Q = {
    "x": lambda: X, "y": lambda: Y, "z": lambda: Z, "h": lambda: H,
    "s": lambda: np.diag([1, 1j]), "sdg": lambda: np.diag([1, -1j]),
    "t": lambda: np.diag([1, np.exp(1j * np.pi / 4)]), "tdg": lambda: np.diag([1, np.exp(-1j * np.pi / 4)]),
    "rx": rx, "ry": ry, "rz": rz,
    "u1": lambda l: np.diag([1, np.exp(1j * l)]),
    "u2": lambda p, l: u3(np.pi / 2, p, l),
    "u3": u3,
}


def _op(n, m, q):
    # qubit 0 is the least significant bit, i.e. the rightmost kron factor
    return reduce(np.kron, [m if k == q else I2 for k in reversed(range(n))])


def controlled(n, c, t, m):
    return _op(n, P0, c) + _op(n, P1, c) @ _op(n, m, t)


def gate_unitary(n, name, qubits, params=()):
    if name in ONE_Q:
        return _op(n, np.asarray(ONE_Q[name](*params), dtype=complex), qubits[0])
    if name == "cx":
        return controlled(n, qubits[0], qubits[1], X)
    if name == "cz":
        return controlled(n, qubits[0], qubits[1], Z)
    if name == "swap":
        a, b = qubits
        return controlled(n, a, b, X) @ controlled(n, b, a, X) @ controlled(n, a, b, X)
    if name == "rxx":
        xx = _op(n, X, qubits[0]) @ _op(n, X, qubits[1])
        t = params[0]
        return np.cos(t / 2) * np.eye(2**n) - 1j * np.sin(t / 2) * xx
    if name == "ccx":
        a, b, t = qubits
        proj = _op(n, P1, a) @ _op(n, P1, b)
        return np.eye(2**n) - proj + proj @ _op(n, X, t)
    raise KeyError(name)


def unitary(circuit):
    """Dense unitary of a qcbench Circuit, ignoring measures and barriers."""
    n = circuit.n_qubits
    u = np.eye(2**n, dtype=complex)
    for g in circuit.gates:
        if g.kind.value in ("measure", "barrier"):
            continue
        u = gate_unitary(n, g.kind.value, g.qubits, g.params) @ u
    return u


def distribution(circuit, positions=None):
    """Output distribution over the qubits ``positions`` (default: all)."""
    n = circuit.n_qubits
    psi = unitary(circuit)[:, 0]
    p = np.abs(psi) ** 2
    positions = list(range(n)) if positions is None else list(positions)
    out = np.zeros(2 ** len(positions))
    for idx, v in enumerate(p):
        key = sum(((idx >> q) & 1) << i for i, q in enumerate(positions))
        out[key] += v
    return out


def fidelity(pa, pb):
    return float(np.sum(np.sqrt(pa * pb)))


def phase_distance(u, v):
    """1 - |tr(U^dag V)| / d, zero iff equal up to global phase."""
    return 1.0 - abs(np.trace(u.conj().T @ v)) / u.shape[0]


def haar_unitary(d, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def embed(n, m, qubits):
    """Full 2**n operator of ``m`` acting on ``qubits`` (first listed = low bit of m's index)."""
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    mask = sum(1 << q for q in qubits)
    for i in range(dim):
        for j in range(dim):
            if i & ~mask != j & ~mask:
                continue
            si = sum(((i >> q) & 1) << k for k, q in enumerate(qubits))
            sj = sum(((j >> q) & 1) << k for k, q in enumerate(qubits))
            full[i, j] = m[si, sj]
    return full
