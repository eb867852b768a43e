"""Dense unitaries, Euler angles, KAK decomposition and two-qubit resynthesis.

Tensor convention: for a gate on qubits ``(q0, q1, ...)`` the row/column index
of its matrix is ``b(q0) + 2*b(q1) + 4*b(q2)``; for a whole circuit the index
is ``sum_q b(q) * 2**q``.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import kernels
from .circuit import ANGLE_TOL, Circuit, Gate, GateKind, angle_is_zero, wrap_angle

MAX_UNITARY_QUBITS = 10

_SQ2 = 1.0 / math.sqrt(2.0)
I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


class NonUnitaryError(ValueError):
    pass


class DecompositionError(RuntimeError):
    pass


# -- gate matrices ----------------------------------------------------------

def rx(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(t: float) -> np.ndarray:
    return np.array([[cmath.exp(-0.5j * t), 0], [0, cmath.exp(0.5j * t)]])


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -cmath.exp(1j * lam) * s],
            [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c],
        ]
    )


_FIXED = {
    GateKind.X: PAULI_X,
    GateKind.Y: PAULI_Y,
    GateKind.Z: PAULI_Z,
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    GateKind.S: np.diag([1, 1j]),
    GateKind.Sdg: np.diag([1, -1j]),
    GateKind.T: np.diag([1, cmath.exp(0.25j * math.pi)]),
    GateKind.Tdg: np.diag([1, cmath.exp(-0.25j * math.pi)]),
    GateKind.CX: np.eye(4, dtype=complex)[[0, 3, 2, 1]],
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.eye(4, dtype=complex)[[0, 2, 1, 3]],
    GateKind.CCX: np.eye(8, dtype=complex)[[0, 1, 2, 7, 4, 5, 6, 3]],
}
XX_PAULI = np.kron(PAULI_X, PAULI_X)


def gate_matrix(g: Gate) -> np.ndarray:
    k = g.kind
    if k in _FIXED:
        return _FIXED[k]
    p = g.params
    if k is GateKind.Rx:
        return rx(p[0])
    if k is GateKind.Ry:
        return ry(p[0])
    if k is GateKind.Rz:
        return rz(p[0])
    if k is GateKind.U1:
        return np.diag([1, cmath.exp(1j * p[0])])
    if k is GateKind.U2:
        return u3(math.pi / 2, p[0], p[1])
    if k is GateKind.U3:
        return u3(*p)
    if k is GateKind.XX:
        return math.cos(p[0] / 2) * np.eye(4) - 1j * math.sin(p[0] / 2) * XX_PAULI
    raise ValueError(f"{k.name} has no unitary matrix")


def apply_gate(state: np.ndarray, g: Gate) -> None:
    """Apply ``g`` in place to a ``(2**n, batch)`` array."""
    m = gate_matrix(g)
    q = g.qubits
    if len(q) == 1:
        kernels.apply_1q(state, m, q[0])
    elif len(q) == 2:
        kernels.apply_2q(state, m, q[0], q[1])
    else:
        kernels.apply_3q(state, m, q[0], q[1], q[2])


def circuit_unitary(c: Circuit) -> np.ndarray:
    if c.n_qubits > MAX_UNITARY_QUBITS:
        raise ValueError(f"circuit_unitary supports at most {MAX_UNITARY_QUBITS} qubits")
    dim = 1 << c.n_qubits
    u = np.eye(dim, dtype=complex)
    for g in c.gates:
        if g.kind is GateKind.Barrier:
            continue
        if g.kind is GateKind.Measure:
            raise ValueError("circuit_unitary: circuit contains measurements")
        apply_gate(u, g)
    return u


def unitary_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|Tr(U^dag V)| / dim."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch {u.shape} vs {v.shape}")
    return float(abs(np.vdot(u, v)) / u.shape[0])


def check_unitary(u: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NonUnitaryError(f"not a square matrix: shape {u.shape}")
    err = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
    if err > tol:
        raise NonUnitaryError(f"matrix is not unitary (||U^dag U - I|| = {err:.3g})")
    return u


def is_identity_up_to_phase(m: np.ndarray, tol: float = ANGLE_TOL) -> bool:
    d = m.shape[0]
    return abs(abs(np.trace(m)) / d - 1.0) < tol * tol / 2 + 1e-15 or (
        np.max(np.abs(m - np.diag(np.diag(m)))) < tol and np.ptp(np.angle(np.diag(m) / m[0, 0])) < tol
    )


# -- single-qubit Euler angles ----------------------------------------------

_DEGEN = 1e-12


def euler_zxz(u: np.ndarray) -> tuple[float, float, float, float]:
    """Return ``(alpha, theta_x, beta, phase)`` with
    ``u = exp(i*phase) * Rz(beta) @ Rx(theta_x) @ Rz(alpha)`` and theta_x in [0, pi]."""
    u = check_unitary(u)
    if u.shape != (2, 2):
        raise ValueError("euler_zxz expects a 2x2 matrix")
    v = u / np.sqrt(np.linalg.det(u))
    c, s = abs(v[0, 0]), abs(v[1, 0])
    theta = 2.0 * math.atan2(s, c)
    # v = +-[[c e^{-i(b+a)/2}, .], [-i s e^{i(b-a)/2}, .]]; the sign ambiguity
    # shifts both half-angles by pi, which is a global phase only
    half_sum = 0.0 if c < _DEGEN else -cmath.phase(v[0, 0])
    half_diff = 0.0 if s < _DEGEN else cmath.phase(1j * v[1, 0])
    beta = wrap_angle(half_sum + half_diff)
    alpha = wrap_angle(half_sum - half_diff)
    rec = rz(beta) @ rx(theta) @ rz(alpha)
    phase = wrap_angle(cmath.phase(np.vdot(rec, u)))
    return alpha, theta, beta, phase


def u3_from_matrix(u: np.ndarray) -> tuple[float, float, float]:
    """Angles of U3 equal to ``u`` up to global phase."""
    c, s = abs(u[0, 0]), abs(u[1, 0])
    theta = 2.0 * math.atan2(s, c)
    if s < _DEGEN:
        gamma = cmath.phase(u[0, 0])
        phi, lam = 0.0, cmath.phase(u[1, 1]) - gamma
    elif c < _DEGEN:
        gamma = cmath.phase(-u[0, 1])
        phi, lam = cmath.phase(u[1, 0]) - gamma, 0.0
    else:
        gamma = cmath.phase(u[0, 0])
        phi = cmath.phase(u[1, 0]) - gamma
        lam = cmath.phase(-u[0, 1]) - gamma
    return theta, wrap_angle(phi), wrap_angle(lam)


# -- KAK ---------------------------------------------------------------------

MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) * _SQ2
MAGIC_DAG = MAGIC.conj().T
# XX, YY, ZZ are diagonal in the magic basis with these eigenvalues
_MAGIC_SIGNS = np.array(
    [np.real(np.diag(MAGIC_DAG @ np.kron(p, p) @ MAGIC)) for p in PAULIS] + [np.ones(4)]
).T


def interaction(kx: float, ky: float, kz: float) -> np.ndarray:
    """exp(i (kx XX + ky YY + kz ZZ))."""
    d = np.exp(1j * (_MAGIC_SIGNS[:, :3] @ np.array([kx, ky, kz])))
    return MAGIC @ np.diag(d) @ MAGIC_DAG


@dataclass(frozen=True)
class WeylCoordinates:
    kx: float
    ky: float
    kz: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.kx, self.ky, self.kz)

    def in_chamber(self, tol: float = 1e-9) -> bool:
        return math.pi / 4 + tol >= self.kx >= self.ky - tol and self.ky + tol >= abs(self.kz)


@dataclass(frozen=True)
class KAKDecomposition:
    """``u = exp(i*phase) * kron(a1, a0) @ interaction(weyl) @ kron(b1, b0)``.

    ``a0``/``b0`` act on the low qubit (first qubit of a gate)."""

    weyl: WeylCoordinates
    a0: np.ndarray
    a1: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    phase: float

    def unitary(self) -> np.ndarray:
        return (
            cmath.exp(1j * self.phase)
            * np.kron(self.a1, self.a0)
            @ interaction(*self.weyl.as_tuple())
            @ np.kron(self.b1, self.b0)
        )


def kron_factor_4x4(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``m = kron(hi, lo)`` with both factors in SU(2) (any residual phase is dropped)."""
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(r)
    if s[1] > 1e-6 * s[0]:
        raise DecompositionError("matrix is not a tensor product")
    hi = (uu[:, 0] * math.sqrt(s[0])).reshape(2, 2)
    lo = (vh[0] * math.sqrt(s[0])).reshape(2, 2)
    hi = hi / np.sqrt(np.linalg.det(hi))
    lo = lo / np.sqrt(np.linalg.det(lo))
    return hi, lo


def _diagonalize_symmetric_unitary(m2: np.ndarray) -> np.ndarray:
    """Real orthogonal P (det +1) with P.T @ m2 @ P diagonal."""
    rng = np.random.default_rng(1234)
    for attempt in range(64):
        if attempt == 0:
            a, b = 1.0, 0.5772156649
        else:
            a, b = rng.normal(size=2)
        _, p = np.linalg.eigh(a * m2.real + b * m2.imag)
        d = p.T @ m2 @ p
        if np.max(np.abs(d - np.diag(np.diag(d)))) < 1e-11:
            if np.linalg.det(p) < 0:
                p[:, 0] = -p[:, 0]
            return p
    raise DecompositionError("failed to diagonalise U^T U in the magic basis")


def _canonicalize(v, left, right, phase, tol):
    """Fold coordinates into pi/4 >= kx >= ky >= |kz|, updating local factors.

    ``left``/``right`` are ``[lo, hi]`` lists; ``phase`` is a complex scalar."""
    v = list(v)
    ph = [phase]

    def shift(k, step):
        # interaction(v) = interaction(v + step*pi/2 e_k) * (-i P_k P_k)^step
        v[k] += step * math.pi / 2
        ph[0] *= (-1j) ** step
        if step % 2:
            p = PAULIS[k]
            right[0] = p @ right[0]
            right[1] = p @ right[1]

    def negate(k1, k2):
        v[k1] = -v[k1]
        v[k2] = -v[k2]
        p = PAULIS[3 - k1 - k2]
        left[0] = left[0] @ p
        right[0] = p @ right[0]

    def swap(k1, k2):
        v[k1], v[k2] = v[k2], v[k1]
        s = (PAULIS[k1] + PAULIS[k2]) * _SQ2
        for side in (left, right):
            for i in (0, 1):
                side[i] = side[i] @ s if side is left else s @ side[i]

    for k in range(3):
        while v[k] <= -math.pi / 4:
            shift(k, 1)
        while v[k] > math.pi / 4:
            shift(k, -1)
    if abs(v[0]) < abs(v[1]):
        swap(0, 1)
    if abs(v[1]) < abs(v[2]):
        swap(1, 2)
    if abs(v[0]) < abs(v[1]):
        swap(0, 1)
    if v[0] < 0:
        negate(0, 2)
    if v[1] < 0:
        negate(1, 2)
    if v[0] > math.pi / 4 - tol and v[2] < 0:
        shift(0, -1)
        negate(0, 2)
    return v, ph[0]


def kak_decompose(u: np.ndarray, tol: float = 1e-9) -> KAKDecomposition:
    u = check_unitary(u)
    if u.shape != (4, 4):
        raise ValueError("kak_decompose expects a 4x4 unitary")
    up = MAGIC_DAG @ u @ MAGIC
    up = up / np.linalg.det(up) ** 0.25
    p = _diagonalize_symmetric_unitary(up.T @ up)
    theta = np.angle(np.diag(p.T @ up.T @ up @ p)) / 2
    k1 = up @ p @ np.diag(np.exp(-1j * theta))
    if np.linalg.det(k1).real < 0:
        theta[0] += math.pi
        k1 = up @ p @ np.diag(np.exp(-1j * theta))
    if np.max(np.abs(k1.imag)) > 1e-7:
        raise DecompositionError("left factor is not real orthogonal")
    kx, ky, kz, _ = np.linalg.solve(_MAGIC_SIGNS, theta)
    a1, a0 = kron_factor_4x4(MAGIC @ k1.real @ MAGIC_DAG)
    b1, b0 = kron_factor_4x4(MAGIC @ p.T @ MAGIC_DAG)
    left, right = [a0, a1], [b0, b1]
    rec = np.kron(a1, a0) @ interaction(kx, ky, kz) @ np.kron(b1, b0)
    g = np.vdot(rec, u) / 4
    (kx, ky, kz), g = _canonicalize((kx, ky, kz), left, right, g, tol)
    out = KAKDecomposition(
        WeylCoordinates(float(kx), float(ky), float(kz)),
        left[0], left[1], right[0], right[1], wrap_angle(cmath.phase(g)),
    )
    err = np.linalg.norm(out.unitary() - u)
    if err > 1e-8:
        raise DecompositionError(f"KAK reconstruction error {err:.3g}")
    return out


def num_cx_required(weyl: WeylCoordinates, tol: float = 1e-9) -> int:
    kx, ky, kz = weyl.as_tuple()
    if abs(kx) < tol and abs(ky) < tol and abs(kz) < tol:
        return 0
    if abs(kx - math.pi / 4) < tol and abs(ky) < tol and abs(kz) < tol:
        return 1
    if abs(kz) < tol:
        return 2
    return 3


# -- two-qubit synthesis ----------------------------------------------------

_H = _FIXED[GateKind.H]
_S = _FIXED[GateKind.S]
_SDG = _FIXED[GateKind.Sdg]
_SWAP_YZ = (PAULI_Y + PAULI_Z) * _SQ2


def _core_ops(m: int, kx: float, ky: float, kz: float):
    """Time-ordered ops realising interaction(kx, ky, kz) up to global phase with
    ``m`` CX gates.  Ops are ``(q, 2x2)`` or ``("cx", c, t)``."""
    if m == 0:
        return []
    if m == 1:
        hz = rz(-math.pi / 2)
        return [
            (0, _H), (1, _H), (0, hz), (1, hz), (1, _H),
            ("cx", 0, 1),
            (1, _H), (0, _H), (1, _H),
        ]
    if m == 2:
        return [
            (0, _SWAP_YZ), (1, _SWAP_YZ),
            ("cx", 0, 1),
            (0, rx(-2 * kx)), (1, rz(-2 * ky)),
            ("cx", 0, 1),
            (0, _SWAP_YZ), (1, _SWAP_YZ),
        ]
    return [
        (1, _SDG),
        ("cx", 0, 1),
        (0, _S), (1, _S), (0, _H), (0, rz(2 * ky)),
        ("cx", 1, 0),
        (0, _H), (0, rx(-2 * kx)), (1, rz(-2 * kz)),
        ("cx", 0, 1),
    ]


def ops_to_cx_u3(ops, n_qubits: int = 2) -> list[Gate]:
    """Fuse runs of 2x2 matrices between CX gates into single U3 gates."""
    pending = [None] * n_qubits
    out: list[Gate] = []

    def flush(q):
        m = pending[q]
        pending[q] = None
        if m is not None and not is_identity_up_to_phase(m):
            out.append(Gate(GateKind.U3, (q,), u3_from_matrix(m)))

    for op in ops:
        if op[0] == "cx":
            _, c, t = op
            flush(c)
            flush(t)
            out.append(Gate(GateKind.CX, (c, t)))
        else:
            q, m = op
            pending[q] = m if pending[q] is None else m @ pending[q]
    for q in range(n_qubits):
        flush(q)
    return out


def _tidy_one_cx(ops):
    """Re-choose the locals of a one-CX op list so that as many as possible are
    the identity (e.g. a CX maps back to a bare CX).

    Any local S that the CX maps to another local (Paulis, Rz on the control,
    Rx on the target) can be moved across it; the prefix factors are reduced
    modulo that group and the suffix recomputed from the full unitary."""
    k = next(i for i, op in enumerate(ops) if op[0] == "cx")
    _, c, t = ops[k]
    pre = [I2, I2]
    total = np.eye(4, dtype=complex)
    for i, op in enumerate(ops):
        if op[0] == "cx":
            total = _cx_matrix(c) @ total
        else:
            q, m = op
            total = _embed(m, q) @ total
            if i < k:
                pre[q] = m @ pre[q]
    cx = _cx_matrix(c)
    best, best_cost = None, None
    for pc in (I2,) + PAULIS:
        for pt in (I2,) + PAULIS:
            b = [None, None]
            b[c] = pc @ pre[c]
            b[t] = pt @ pre[t]
            if _is_diagonal(b[c]):
                b[c] = I2
            if _is_diagonal(_H @ b[t] @ _H):
                b[t] = I2
            rest = total @ np.kron(b[1], b[0]).conj().T @ cx
            try:
                a1, a0 = kron_factor_4x4(rest)
            except DecompositionError:
                continue
            cand = [b[0], b[1], a0, a1]
            cost = sum(not is_identity_up_to_phase(m) for m in cand)
            if best_cost is None or cost < best_cost:
                best, best_cost = cand, cost
    if best is None:
        return ops
    b0, b1, a0, a1 = best
    return [(0, b0), (1, b1), ops[k], (0, a0), (1, a1)]


def _is_diagonal(m: np.ndarray, tol: float = 1e-9) -> bool:
    return abs(m[0, 1]) < tol and abs(m[1, 0]) < tol


def _cx_matrix(control: int) -> np.ndarray:
    cx = _FIXED[GateKind.CX]
    if control == 0:
        return cx
    sw = _FIXED[GateKind.SWAP]
    return sw @ cx @ sw


def _embed(m: np.ndarray, q: int) -> np.ndarray:
    return np.kron(I2, m) if q == 0 else np.kron(m, I2)


def _synth_with(kak: KAKDecomposition, cx_count: int) -> Circuit:
    ops = [(0, kak.b0), (1, kak.b1)]
    ops += _core_ops(cx_count, *kak.weyl.as_tuple())
    ops += [(0, kak.a0), (1, kak.a1)]
    if cx_count == 1:
        ops = _tidy_one_cx(ops)
    return Circuit(2, ops_to_cx_u3(ops))


def synthesize_2q(target: KAKDecomposition | np.ndarray, fid_tol: float = 1e-9) -> Circuit:
    """Two-qubit [CX, U3] circuit with the minimal CX count for ``target``."""
    kak = target if isinstance(target, KAKDecomposition) else kak_decompose(target)
    u = kak.unitary()
    m = num_cx_required(kak.weyl)
    for cx_count in range(m, 4):
        circ = _synth_with(kak, cx_count)
        if cx_count == 1 and len(circ) > 1:
            # the reversed CX orientation can need fewer local gates
            sw = _FIXED[GateKind.SWAP]
            alt = _synth_with(kak_decompose(sw @ u @ sw), 1)
            alt = alt.with_gates(g.remap((1, 0)) for g in alt.gates)
            if len(alt) < len(circ):
                circ = alt
        if unitary_fidelity(u, circuit_unitary(circ)) > 1 - fid_tol:
            return circ
    raise DecompositionError("two-qubit synthesis failed verification")


def rz_rx_refine(c: Circuit) -> Circuit:
    """Rewrite a [CX, U3] circuit over [CX, Rz, Rx] with few rotations.

    Each U3 is Euler-expanded in Z-X-Z or X-Z-X form; rotations are then slid
    through CX gates they commute with (Rz across controls, Rx across targets)
    and merged with their same-axis neighbours.  All 2**k form choices are
    tried for k <= 10 U3 gates; otherwise Z-X-Z everywhere.
    """
    slots = [i for i, g in enumerate(c.gates) if g.kind is GateKind.U3]
    if len(slots) > 10:
        choices = [(False,) * len(slots)]
    else:
        choices = list(itertools.product((False, True), repeat=len(slots)))
    best = None
    for choice in choices:
        form = dict(zip(slots, choice))
        gates: list[Gate] = []
        for i, g in enumerate(c.gates):
            if g.kind is GateKind.U3:
                gates.extend(_euler_gates(gate_matrix(g), g.qubits[0], form[i]))
            else:
                gates.append(g)
        gates = merge_commuting_rotations(gates)
        if best is None or len(gates) < len(best):
            best = gates
    return c.with_gates(best)


def _euler_gates(m: np.ndarray, q: int, x_outer: bool) -> list[Gate]:
    if x_outer:
        # H Rz H = Rx, so Euler-decompose H m H
        alpha, theta, beta, _ = euler_zxz(_H @ m @ _H)
        seq = [(GateKind.Rx, alpha), (GateKind.Rz, theta), (GateKind.Rx, beta)]
    else:
        alpha, theta, beta, _ = euler_zxz(m)
        seq = [(GateKind.Rz, alpha), (GateKind.Rx, theta), (GateKind.Rz, beta)]
    return [Gate(k, (q,), (a,)) for k, a in seq if not angle_is_zero(a)]


def _slides_past(rot: GateKind, q: int, g: Gate) -> bool:
    if q not in g.qubits:
        return True
    if g.kind is GateKind.CX:
        return (rot is GateKind.Rz and g.qubits[0] == q) or (rot is GateKind.Rx and g.qubits[1] == q)
    return False


def merge_commuting_rotations(gates: list[Gate]) -> list[Gate]:
    """Merge Rz/Rx pairs on one qubit separated only by CX gates they commute with."""
    gates = list(gates)
    changed = True
    while changed:
        changed = False
        for i, g in enumerate(gates):
            if g is None or g.kind not in (GateKind.Rz, GateKind.Rx):
                continue
            q = g.qubits[0]
            for j in range(i + 1, len(gates)):
                h = gates[j]
                if h is None:
                    continue
                if h.kind is g.kind and h.qubits == g.qubits:
                    total = wrap_angle(g.params[0] + h.params[0])
                    gates[j] = None if angle_is_zero(total) else Gate(g.kind, g.qubits, (total,))
                    gates[i] = None
                    changed = True
                    break
                if not _slides_past(g.kind, q, h):
                    break
        gates = [g for g in gates if g is not None]
    return gates
