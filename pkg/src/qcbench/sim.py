"""Statevector simulation and equivalence checking by classical fidelity.

Distributions are over computational-basis bitstrings of all qubits, qubit 0
least significant.  Measure gates only mark readout (terminal-measurement
convention); Barriers are ignored.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, GateKind
from .synthesis import apply_gate

MAX_SIM_QUBITS = 15
# routed circuits on large devices are simulated on their active qubits only
MAX_ACTIVE_QUBITS = 20
DEFAULT_THRESHOLD = 1e-9


class SimulationError(ValueError):
    pass


def _check_terminal_measures(c: Circuit) -> None:
    measured: set[int] = set()
    for g in c.gates:
        if g.kind is GateKind.Measure:
            measured.add(g.qubits[0])
        elif g.kind is not GateKind.Barrier and measured.intersection(g.qubits):
            raise SimulationError(f"gate {g!r} acts on a qubit after its measurement")


def simulate(c: Circuit, max_qubits: int = MAX_SIM_QUBITS) -> np.ndarray:
    """Amplitudes of ``U|0...0>``."""
    if c.n_qubits > max_qubits:
        raise SimulationError(f"{c.n_qubits} qubits exceeds the simulation limit of {max_qubits}")
    _check_terminal_measures(c)
    state = np.zeros((1 << c.n_qubits, 1), dtype=complex)
    state[0, 0] = 1.0
    for g in c.gates:
        if g.kind.is_unitary:
            apply_gate(state, g)
    return state[:, 0]


def probabilities(c: Circuit, max_qubits: int = MAX_SIM_QUBITS) -> np.ndarray:
    psi = simulate(c, max_qubits)
    return (psi * psi.conj()).real


def marginal(p: np.ndarray, n: int, keep: list[int]) -> np.ndarray:
    """Distribution of qubits ``keep`` (bit i of the result is qubit keep[i]),
    summing over all other qubits."""
    t = p.reshape((2,) * n)  # axis a holds qubit n-1-a
    drop = tuple(n - 1 - q for q in range(n) if q not in keep)
    if drop:
        t = t.sum(axis=drop)
    remaining = [q for q in range(n - 1, -1, -1) if q in keep]  # axis order
    order = [remaining.index(q) for q in reversed(keep)]
    return np.ascontiguousarray(np.transpose(t, order)).reshape(-1)


def bhattacharyya(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None))))


def _compact(c: Circuit) -> tuple[Circuit, list[int]]:
    """Drop qubits no gate touches; returns the smaller circuit and the
    original index of each kept qubit."""
    used = sorted({q for g in c.gates for q in g.qubits}) or [0]
    index = {q: i for i, q in enumerate(used)}
    gates = [g.remap(index) for g in c.gates]
    return Circuit(len(used), gates, c.n_cbits), used


def _distribution(c: Circuit, positions: list[int], max_qubits: int) -> np.ndarray:
    """Distribution over the qubits ``positions`` of ``c`` (untouched qubits stay |0>)."""
    small, used = _compact(c)
    if small.n_qubits > max_qubits:
        raise SimulationError(f"{small.n_qubits} active qubits exceeds the limit of {max_qubits}")
    p = probabilities(small, max_qubits)
    where = {q: i for i, q in enumerate(used)}
    if all(q in where for q in positions):
        return marginal(p, small.n_qubits, [where[q] for q in positions])
    # some requested qubits are idle: they are deterministically 0
    active = [q for q in positions if q in where]
    sub = marginal(p, small.n_qubits, [where[q] for q in active])
    out = np.zeros(1 << len(positions))
    bit_of = [positions.index(q) for q in active]
    for idx, val in enumerate(sub):
        full = 0
        for j, b in enumerate(bit_of):
            if idx >> j & 1:
                full |= 1 << b
        out[full] = val
    return out


def classical_fidelity(
    a: Circuit,
    b: Circuit,
    perm: list[int] | None = None,
    max_qubits: int = MAX_SIM_QUBITS,
) -> float:
    """Sum over bitstrings of sqrt(p_a * p_b).

    ``perm[i]`` is the qubit of ``b`` holding qubit ``i`` of ``a``; qubits of
    ``b`` outside ``perm`` are marginalised.  Without ``perm`` the widths
    must match and the identity is used."""
    if perm is None:
        if a.n_qubits != b.n_qubits:
            raise ValueError(f"width mismatch: {a.n_qubits} vs {b.n_qubits}")
        perm = list(range(a.n_qubits))
    if len(perm) != a.n_qubits or len(set(perm)) != len(perm):
        raise ValueError("perm must be an injective map of the qubits of a")
    if max(perm) >= b.n_qubits:
        raise ValueError("perm refers to qubits outside b")
    pa = _distribution(a, list(range(a.n_qubits)), max_qubits)
    pb = _distribution(b, list(perm), max_qubits)
    return bhattacharyya(pa, pb)


class Verdict(enum.Enum):
    EQUIVALENT = "equivalent"
    INEQUIVALENT = "inequivalent"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EquivalenceReport:
    f_cl: float
    permutation_used: tuple[int, ...]
    verdict: Verdict
    reason: str = ""
    threshold: float = DEFAULT_THRESHOLD

    @property
    def equivalent(self) -> bool:
        return self.verdict is Verdict.EQUIVALENT

    @property
    def error(self) -> float:
        return abs(1.0 - self.f_cl)


def logical_positions(p_out, n_logical: int) -> list[int]:
    """Physical qubit holding each logical qubit, from a physical->logical map."""
    pos = [-1] * n_logical
    for phys, log in enumerate(p_out):
        if 0 <= log < n_logical:
            pos[log] = phys
    if min(pos, default=0) < 0:
        raise ValueError("p_out does not place every logical qubit")
    return pos


def check_equivalence(
    a: Circuit,
    result,
    threshold: float = DEFAULT_THRESHOLD,
    max_qubits: int = MAX_ACTIVE_QUBITS,
    positions=None,
) -> EquivalenceReport:
    """Compare ``a`` with a Circuit or a routing result (anything with
    ``circuit`` and ``p_out`` attributes).  ``positions[i]``, if given,
    names the qubit of a Circuit ``result`` that holds qubit ``i`` of ``a``."""
    if isinstance(result, Circuit) and positions is not None:
        b = result
        perm = [int(p) for p in positions]
    elif isinstance(result, Circuit):
        b = result
        perm = list(range(a.n_qubits))
        if b.n_qubits < a.n_qubits:
            return EquivalenceReport(0.0, tuple(perm), Verdict.INCONCLUSIVE,
                                     "output narrower than input", threshold)
    else:
        b = result.circuit
        try:
            perm = logical_positions(result.p_out, a.n_qubits)
        except ValueError as exc:
            return EquivalenceReport(0.0, (), Verdict.INCONCLUSIVE, str(exc), threshold)
    try:
        f = classical_fidelity(a, b, perm, max_qubits=max_qubits)
    except (SimulationError, ValueError) as exc:
        return EquivalenceReport(float("nan"), tuple(perm), Verdict.INCONCLUSIVE, str(exc), threshold)
    verdict = Verdict.EQUIVALENT if abs(1.0 - f) < threshold else Verdict.INEQUIVALENT
    return EquivalenceReport(f, tuple(perm), verdict, "", threshold)
