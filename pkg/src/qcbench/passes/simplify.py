"""Local simplification passes: inverse-pair removal, rotation merging,
single-qubit fusion, commutation-based cancellation and small-angle pruning."""

from __future__ import annotations

import math

import numpy as np

from ..circuit import (
    ANGLE_TOL,
    DIAGONAL_KINDS,
    ONE_QUBIT_KINDS,
    SYMMETRIC_KINDS,
    Circuit,
    Gate,
    GateKind,
    angle_is_zero,
    wrap_angle,
)
from ..synthesis import gate_matrix, is_identity_up_to_phase, u3_from_matrix

_MERGEABLE = frozenset({GateKind.Rx, GateKind.Ry, GateKind.Rz, GateKind.U1, GateKind.XX})
_INVERSE_PAIRS = {
    (GateKind.S, GateKind.Sdg), (GateKind.Sdg, GateKind.S),
    (GateKind.T, GateKind.Tdg), (GateKind.Tdg, GateKind.T),
}
CANCELLABLE_KINDS = frozenset({GateKind.H, GateKind.X, GateKind.Y, GateKind.Z, GateKind.CX, GateKind.CZ})


def same_placement(a: Gate, b: Gate) -> bool:
    if a.kind in SYMMETRIC_KINDS and b.kind is a.kind:
        return set(a.qubits) == set(b.qubits)
    return a.qubits == b.qubits


def _cancel_or_merge(a: Gate, b: Gate):
    """Result of ``a`` followed by ``b`` on identical qubits: ``None`` if they
    do not simplify, ``[]`` if they cancel, ``[g]`` if they merge."""
    if not same_placement(a, b) and not (a.is_1q and b.is_1q and a.qubits == b.qubits):
        return None
    if a.kind is b.kind and a.kind in _MERGEABLE:
        total = wrap_angle(a.params[0] + b.params[0])
        return [] if angle_is_zero(total) else [Gate(a.kind, a.qubits, (total,))]
    if a.kind is b.kind and a.kind in (GateKind.H, GateKind.X, GateKind.Y, GateKind.Z,
                                       GateKind.CX, GateKind.CZ, GateKind.SWAP, GateKind.CCX):
        return []
    if (a.kind, b.kind) in _INVERSE_PAIRS:
        return []
    if a.is_1q and b.is_1q:
        if is_identity_up_to_phase(gate_matrix(b) @ gate_matrix(a)):
            return []
    return None


def _remove_pairs_once(gates: list[Gate]) -> tuple[list[Gate], bool]:
    out: list[Gate | None] = []
    stacks: dict[int, list[int]] = {}
    changed = False
    for g in gates:
        if g.kind.is_unitary:
            tops = {stacks[q][-1] if stacks.get(q) else None for q in g.qubits}
            if len(tops) == 1 and None not in tops:
                j = tops.pop()
                prev = out[j]
                if set(prev.qubits) == set(g.qubits) and prev.kind.is_unitary:
                    res = _cancel_or_merge(prev, g)
                    if res is not None:
                        changed = True
                        if res:
                            out[j] = res[0]
                        else:
                            out[j] = None
                            for q in g.qubits:
                                stacks[q].pop()
                        continue
        out.append(g)
        for q in g.qubits:
            stacks.setdefault(q, []).append(len(out) - 1)
    return [g for g in out if g is not None], changed


def _drop_diagonal_before_measure(gates: list[Gate]) -> tuple[list[Gate], bool]:
    """Remove diagonal gates whose every qubit is next used by a Measure
    (barriers are looked through)."""
    nxt: dict[int, GateKind | None] = {}
    keep = [True] * len(gates)
    changed = False
    for i in range(len(gates) - 1, -1, -1):
        g = gates[i]
        if g.kind is GateKind.Barrier:
            continue
        if g.kind in DIAGONAL_KINDS and all(nxt.get(q) is GateKind.Measure for q in g.qubits):
            keep[i] = False
            changed = True
            continue
        for q in g.qubits:
            nxt[q] = g.kind
    return [g for g, k in zip(gates, keep) if k], changed


def remove_redundancies(c: Circuit) -> Circuit:
    """Cancel adjacent inverse pairs, merge adjacent same-axis rotations and
    drop diagonal gates that only precede measurements; iterated to a fixpoint."""
    gates = list(c.gates)
    changed = True
    while changed:
        gates, a = _remove_pairs_once(gates)
        gates, b = _drop_diagonal_before_measure(gates)
        changed = a or b
    return c.with_gates(gates)


def merge_1q(c: Circuit, tol: float = ANGLE_TOL) -> Circuit:
    """Replace every run of single-qubit gates on one qubit by one U3.

    Runs that multiply to the identity are dropped; a run of one gate is kept
    as it is unless it is the identity."""
    out: list[Gate | None] = []
    runs: dict[int, list[int]] = {}

    def flush(q):
        idx = runs.pop(q, [])
        if not idx:
            return
        m = np.eye(2, dtype=complex)
        for i in idx:
            m = gate_matrix(out[i]) @ m
        for i in idx:
            out[i] = None
        if is_identity_up_to_phase(m, tol):
            return
        if len(idx) == 1:
            out[idx[0]] = gates_in[idx[0]]
        else:
            out[idx[-1]] = Gate(GateKind.U3, (q,), u3_from_matrix(m))

    gates_in: list[Gate] = []
    for g in c.gates:
        if g.kind in ONE_QUBIT_KINDS:
            gates_in.append(g)
            out.append(g)
            runs.setdefault(g.qubits[0], []).append(len(out) - 1)
            continue
        for q in g.qubits:
            flush(q)
        gates_in.append(g)
        out.append(g)
    for q in list(runs):
        flush(q)
    return c.with_gates(g for g in out if g is not None)


# -- commutation ------------------------------------------------------------

_Z_ROLE = frozenset({GateKind.Z, GateKind.S, GateKind.Sdg, GateKind.T, GateKind.Tdg,
                     GateKind.Rz, GateKind.U1})
_X_ROLE = frozenset({GateKind.X, GateKind.Rx})
_Y_ROLE = frozenset({GateKind.Y, GateKind.Ry})


def qubit_role(g: Gate, q: int) -> str | None:
    """Pauli axis whose algebra contains the action of ``g`` on qubit ``q``."""
    k = g.kind
    if k in _Z_ROLE or k is GateKind.CZ:
        return "z"
    if k in _X_ROLE or k is GateKind.XX:
        return "x"
    if k in _Y_ROLE:
        return "y"
    if k is GateKind.CX:
        return "z" if q == g.qubits[0] else "x"
    if k is GateKind.CCX:
        return "x" if q == g.qubits[2] else "z"
    if k is GateKind.U3 and angle_is_zero(g.params[0]):
        return "z"
    return None


def gates_commute(a: Gate, b: Gate) -> bool:
    """Sufficient commutation test from per-qubit Pauli roles."""
    shared = set(a.qubits) & set(b.qubits)
    if not shared:
        return True
    if not (a.kind.is_unitary and b.kind.is_unitary):
        return False
    for q in shared:
        ra = qubit_role(a, q)
        if ra is None or ra != qubit_role(b, q):
            return False
    return True


def _cancel_through_commutation(gates: list[Gate]) -> tuple[list[Gate], bool]:
    gates = list(gates)
    changed = False
    for i in range(len(gates)):
        g = gates[i]
        if g is None or g.kind not in CANCELLABLE_KINDS:
            continue
        for j in range(i + 1, len(gates)):
            h = gates[j]
            if h is None or not set(h.qubits) & set(g.qubits):
                continue
            if h.kind is g.kind and same_placement(g, h):
                gates[i] = gates[j] = None
                changed = True
                break
            if not gates_commute(g, h):
                break
    return [g for g in gates if g is not None], changed


def _z_angle(g: Gate) -> float:
    k = g.kind
    if k is GateKind.Z:
        return math.pi
    if k is GateKind.S:
        return math.pi / 2
    if k is GateKind.Sdg:
        return -math.pi / 2
    if k is GateKind.T:
        return math.pi / 4
    if k is GateKind.Tdg:
        return -math.pi / 4
    if k is GateKind.U3:
        return g.params[1] + g.params[2]
    return g.params[0]  # Rz, U1


def commute_rz_forward(gates: list[Gate]) -> tuple[list[Gate], bool]:
    """Move single-qubit Z rotations toward the circuit end through gates that
    act diagonally on their qubit, merging them and absorbing them into Measure."""
    items: list[list] = [[g, False] for g in gates]  # [gate or None, settled]
    changed = False
    i = 0
    while i < len(items):
        g, settled = items[i]
        if g is None or settled or g.kind not in _Z_ROLE:
            i += 1
            continue
        q = g.qubits[0]
        angle = _z_angle(g)
        merged = False
        stop = None
        for j in range(i + 1, len(items)):
            h = items[j][0]
            if h is None or q not in h.qubits or h.kind is GateKind.Barrier:
                continue
            if h.kind in _Z_ROLE:
                angle += _z_angle(h)
                items[j][0] = None
                merged = True
                continue
            if h.kind is not GateKind.Measure and qubit_role(h, q) == "z":
                continue
            stop = j
            break
        absorbed = stop is not None and items[stop][0].kind is GateKind.Measure
        new = None
        if not absorbed and not angle_is_zero(angle):
            new = Gate(GateKind.Rz, (q,), (wrap_angle(angle),))
        pos = stop if stop is not None else len(items)
        moved = any(items[k][0] is not None and q in items[k][0].qubits for k in range(i + 1, pos))
        if merged or absorbed or moved or new != g:
            changed = True
            items[i][0] = None
            if new is not None:
                items.insert(pos, [new, True])
        else:
            items[i][1] = True
        i += 1
    return [g for g, _ in items if g is not None], changed


def commutative_cancellation(c: Circuit, commute_rz: bool = False) -> Circuit:
    """Cancel pairs of identical self-inverse gates (H, X, Y, Z, CX, CZ)
    separated only by gates that commute with them."""
    gates = list(c.gates)
    changed = True
    while changed:
        gates, changed = _cancel_through_commutation(gates)
        if commute_rz:
            gates, moved = commute_rz_forward(gates)
            if moved:
                gates, more = _cancel_through_commutation(gates)
                changed = changed or more
    return c.with_gates(gates)


def drop_negligible(c: Circuit, tol: float = 1e-8) -> Circuit:
    """Remove rotations whose angle is within ``tol`` of a multiple of 2*pi."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")

    def negligible(g: Gate) -> bool:
        if g.kind in _MERGEABLE:
            return angle_is_zero(g.params[0], tol)
        if g.kind is GateKind.U3:
            return angle_is_zero(g.params[0], tol) and angle_is_zero(g.params[1] + g.params[2], tol)
        return False

    return c.with_gates(g for g in c.gates if not negligible(g))
