"""Gate-set conversion.

Three-qubit gates are unrolled first, two-qubit gates are translated to the
target's entangling gate, and every run of single-qubit gates between them is
fused and re-emitted in the target's single-qubit vocabulary.
"""

from __future__ import annotations

import math

import numpy as np

from ..circuit import (
    ONE_QUBIT_KINDS,
    Circuit,
    Gate,
    GateKind,
    GateSet,
    angle_is_zero,
    get_gateset,
    wrap_angle,
)
from ..synthesis import (
    _FIXED,
    circuit_unitary,
    euler_zxz,
    gate_matrix,
    is_identity_up_to_phase,
    rz,
    u3_from_matrix,
    unitary_fidelity,
)

HALF_PI = math.pi / 2
SUPPORTED_FAMILIES = ("cx_u3", "cx_rz_rx", "cz_rz_rx90", "cz_rz_phasedx", "xx_rz_rx")


class RebaseError(ValueError):
    pass


def unroll_ccx(a: int, b: int, t: int) -> list[Gate]:
    """Standard Toffoli network with 6 CX and T/Tdg/H gates."""
    G = Gate
    K = GateKind
    return [
        G(K.H, (t,)), G(K.CX, (b, t)), G(K.Tdg, (t,)), G(K.CX, (a, t)), G(K.T, (t,)),
        G(K.CX, (b, t)), G(K.Tdg, (t,)), G(K.CX, (a, t)), G(K.T, (b,)), G(K.T, (t,)),
        G(K.H, (t,)), G(K.CX, (a, b)), G(K.T, (a,)), G(K.Tdg, (b,)), G(K.CX, (a, b)),
    ]


def unroll_3q(c: Circuit) -> Circuit:
    out = []
    for g in c.gates:
        if g.kind is GateKind.CCX:
            out.extend(unroll_ccx(*g.qubits))
        else:
            out.append(g)
    return c.with_gates(out)


# -- two-qubit translations, as op lists: (q, 2x2) or Gate ----------------------

_H = _FIXED[GateKind.H]

# CX(c, t) with one XX(-pi/2) and single-qubit rotations (time order); checked
# against the CX matrix below
_IONQ_CX = (
    ("c", GateKind.Rx, HALF_PI),
    ("c", GateKind.Rz, HALF_PI),
    ("xx", GateKind.XX, -HALF_PI),
    ("c", GateKind.Rz, HALF_PI),
    ("c", GateKind.Rx, HALF_PI),
    ("c", GateKind.Rz, -HALF_PI),
    ("t", GateKind.Rx, HALF_PI),
)


def ionq_cx(c: int, t: int) -> list[Gate]:
    out = []
    for role, kind, angle in _IONQ_CX:
        qubits = (c, t) if role == "xx" else ((c,) if role == "c" else (t,))
        out.append(Gate(kind, qubits, (angle,)))
    return out


def _verify_ionq_identity() -> None:
    u = circuit_unitary(Circuit(2, ionq_cx(0, 1)))
    if unitary_fidelity(u, _FIXED[GateKind.CX]) < 1 - 1e-12:
        raise RuntimeError("CX-from-XX identity failed verification")


_verify_ionq_identity()


def _cx_ops(c: int, t: int, ent: GateKind) -> list:
    if ent is GateKind.CX:
        return [Gate(GateKind.CX, (c, t))]
    if ent is GateKind.CZ:
        return [(t, _H), Gate(GateKind.CZ, (c, t)), (t, _H)]
    if ent is GateKind.XX:
        return [g if g.kind is GateKind.XX else (g.qubits[0], gate_matrix(g)) for g in ionq_cx(c, t)]
    raise RebaseError(f"no translation of CX to {ent.name}")


def _two_qubit_ops(g: Gate, ent: GateKind) -> list:
    k = g.kind
    if k is ent:
        return [g]
    a, b = g.qubits
    if k is GateKind.CX:
        return _cx_ops(a, b, ent)
    if k is GateKind.CZ:
        return [(b, _H)] + _cx_ops(a, b, ent) + [(b, _H)]
    if k is GateKind.SWAP:
        return _cx_ops(a, b, ent) + _cx_ops(b, a, ent) + _cx_ops(a, b, ent)
    if k is GateKind.XX:
        # XX(t) = (H x H) CX Rz(t) CX (H x H)
        mid = [(b, rz(g.params[0]))]
        return [(a, _H), (b, _H)] + _cx_ops(a, b, ent) + mid + _cx_ops(a, b, ent) + [(a, _H), (b, _H)]
    raise RebaseError(f"cannot convert {k.name}")


# -- single-qubit emission ------------------------------------------------------

def _rz(q, t):
    return [] if angle_is_zero(t) else [Gate(GateKind.Rz, (q,), (wrap_angle(t),))]


def _rx(q, t):
    return [] if angle_is_zero(t) else [Gate(GateKind.Rx, (q,), (wrap_angle(t),))]


def _is_diag(m, tol=1e-12):
    return abs(m[0, 1]) < tol and abs(m[1, 0]) < tol


def emit_1q(m: np.ndarray, q: int, family: str) -> list[Gate]:
    """Gates of ``family`` realising ``m`` up to global phase (time order)."""
    if is_identity_up_to_phase(m):
        return []
    if family == "cx_u3":
        return [Gate(GateKind.U3, (q,), u3_from_matrix(m))]
    if _is_diag(m):
        return _rz(q, np.angle(m[1, 1]) - np.angle(m[0, 0]))
    if family in ("cx_rz_rx", "xx_rz_rx"):
        alpha, theta, beta, _ = euler_zxz(m)
        return _rz(q, alpha) + _rx(q, theta) + _rz(q, beta)
    theta, phi, lam = u3_from_matrix(m)
    if family == "cz_rz_rx90":
        # a lone Rx(k*pi/2) is already native
        alpha, th, beta, _ = euler_zxz(m)
        if angle_is_zero(alpha) and angle_is_zero(beta) and angle_is_zero(math.remainder(th, HALF_PI)):
            return _rx(q, th)
        # time order Rz(lam), Rx(pi/2), Rz(theta), Rx(-pi/2), Rz(phi) equals U3 up to phase
        return _rz(q, lam) + _rx(q, HALF_PI) + _rz(q, theta) + _rx(q, -HALF_PI) + _rz(q, phi)
    if family == "cz_rz_phasedx":
        # U3(theta, phi, lam) ~ Rz(phi + lam) U3(theta, -lam, lam)
        return [Gate(GateKind.U3, (q,), (theta, wrap_angle(-lam), wrap_angle(lam)))] + _rz(q, phi + lam)
    raise RebaseError(f"unsupported target family {family!r}")


def _family_of(target: GateSet | str) -> tuple[str, GateKind]:
    gs = get_gateset(target)
    if gs.name not in SUPPORTED_FAMILIES:
        raise RebaseError(f"unsupported target gate set {gs.name!r}; supported: {', '.join(SUPPORTED_FAMILIES)}")
    return gs.name, gs.two_qubit_kind()


def rebase(c: Circuit, target: GateSet | str) -> Circuit:
    family, ent = _family_of(target)
    c = unroll_3q(c)
    ops: list = []
    for g in c.gates:
        if g.kind in ONE_QUBIT_KINDS:
            ops.append((g.qubits[0], gate_matrix(g)))
        elif g.kind.is_unitary:
            ops.extend(_two_qubit_ops(g, ent))
        else:
            ops.append(g)
    pending: dict[int, np.ndarray] = {}
    out: list[Gate] = []

    def flush(q):
        m = pending.pop(q, None)
        if m is not None:
            out.extend(emit_1q(m, q, family))

    for op in ops:
        if isinstance(op, Gate):
            for q in op.qubits:
                flush(q)
            out.append(op)
        else:
            q, m = op
            pending[q] = m @ pending[q] if q in pending else m
    for q in sorted(pending):
        flush(q)
    res = c.with_gates(out)
    gs = get_gateset(target)
    bad = [g for g in res.gates if not gs.contains(g)]
    if bad:
        raise RebaseError(f"rebase produced non-native gate {bad[0]!r}")
    return res

