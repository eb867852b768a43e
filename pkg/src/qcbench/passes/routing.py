"""Qubit routing: SWAP insertion so every two-qubit gate lies on a coupling edge.

Measures and barriers are taken off before routing and re-appended at the end
on the physical qubits that hold their logical qubits after the last SWAP.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._kernels import kernels
from ..circuit import Circuit, Gate, GateKind, asap_layers
from ..hardware import CouplingGraph, HardwareError, HardwareSpec
from .rebase import unroll_3q

STRATEGIES = ("sabre_lite", "greedy_slice")
EXT_WEIGHT = 0.5
DECAY_STEP = 0.001
DECAY_RESET = 5
DEFAULT_LOOKAHEAD = 5


class RoutingError(HardwareError):
    pass


@dataclass(frozen=True)
class RoutingResult:
    """``p_in[l]`` is the physical qubit first holding logical ``l``;
    ``p_out[p]`` is the logical qubit held by physical ``p`` at the end.
    Logical indices at or above the input width are idle ancillas."""

    circuit: Circuit
    p_in: tuple[int, ...]
    p_out: tuple[int, ...]


def fix_polarity(gates, coupling: CouplingGraph | None) -> list[Gate]:
    """Turn CX gates against a directed edge around with Hadamards."""
    if coupling is None or not coupling.directed:
        return list(gates)
    out = []
    for g in gates:
        if g.kind is GateKind.CX and not coupling.has_edge(*g.qubits) and coupling.has_edge(*g.qubits[::-1]):
            a, b = g.qubits
            hs = [Gate(GateKind.H, (a,)), Gate(GateKind.H, (b,))]
            out += hs + [Gate(GateKind.CX, (b, a))] + hs
        else:
            out.append(g)
    return out


def _swap_as_cx(a: int, b: int) -> list[Gate]:
    return [Gate(GateKind.CX, (a, b)), Gate(GateKind.CX, (b, a)), Gate(GateKind.CX, (a, b))]


def _split_terminal(c: Circuit) -> tuple[list[Gate], list[Gate]]:
    """Unitary body and the trailing readout block (measures and the
    barriers after the last unitary gate)."""
    last_unitary = max((i for i, g in enumerate(c.gates) if g.kind.is_unitary), default=-1)
    measured: set[int] = set()
    body, tail = [], []
    for i, g in enumerate(c.gates):
        if g.kind is GateKind.Measure:
            measured.add(g.qubits[0])
            tail.append(g)
        elif g.kind is GateKind.Barrier:
            if i > last_unitary:
                tail.append(g)
        else:
            if measured.intersection(g.qubits):
                raise RoutingError(f"gate {g!r} follows a measurement on the same qubit")
            body.append(g)
    return body, tail


class _Dag:
    """Gate dependencies through shared qubits."""

    def __init__(self, gates: list[Gate]):
        self.gates = gates
        self.succ: list[list[int]] = [[] for _ in gates]
        self.indeg = [0] * len(gates)
        last: dict[int, int] = {}
        for i, g in enumerate(gates):
            preds = {last[q] for q in g.qubits if q in last}
            for p in preds:
                self.succ[p].append(i)
            self.indeg[i] = len(preds)
            for q in g.qubits:
                last[q] = i


class _Router:
    def __init__(self, coupling: CouplingGraph, lookahead: int, rng: np.random.Generator):
        self.n = coupling.n_nodes
        self.dist = coupling.distance_matrix()
        if np.isinf(self.dist).any():
            raise RoutingError("coupling graph is disconnected")
        self.pairs = coupling.undirected_pairs()
        self.nbrs = [[] for _ in range(self.n)]
        for a, b in self.pairs:
            self.nbrs[a].append(b)
            self.nbrs[b].append(a)
        self.lookahead = lookahead
        self.rng = rng

    def _adjacent(self, l2p, g: Gate) -> bool:
        a, b = g.qubits
        return self.dist[l2p[a], l2p[b]] == 1

    @staticmethod
    def _apply_swap(l2p, p2l, pa, pb):
        la, lb = p2l[pa], p2l[pb]
        p2l[pa], p2l[pb] = lb, la
        l2p[la], l2p[lb] = pb, pa

    def _step_toward(self, pa: int, pb: int) -> int:
        """Neighbour of ``pa`` one hop closer to ``pb`` (lowest index)."""
        return min(v for v in self.nbrs[pa] if self.dist[v, pb] == self.dist[pa, pb] - 1)

    def _route_along_path(self, l2p, p2l, g: Gate, out):
        a, b = g.qubits
        while self.dist[l2p[a], l2p[b]] > 1:
            pa = l2p[a]
            nxt = self._step_toward(pa, l2p[b])
            self._apply_swap(l2p, p2l, pa, nxt)
            out.append(Gate(GateKind.SWAP, (pa, nxt)))

    def _extended(self, dag: _Dag, front: list[int], indeg: list[int]) -> list[int]:
        ext: list[int] = []
        seen = set(front)
        local = {}
        queue = list(front)
        while queue and len(ext) < self.lookahead:
            nxt = []
            for i in queue:
                for s in dag.succ[i]:
                    if s in seen:
                        continue
                    local[s] = local.get(s, indeg[s]) - 1
                    if local[s] == 0:
                        seen.add(s)
                        nxt.append(s)
                        if dag.gates[s].is_2q and len(ext) < self.lookahead:
                            ext.append(s)
            queue = nxt
        return ext

    def sabre(self, gates: list[Gate], l2p: np.ndarray):
        """One SABRE-style traversal. Returns the emitted physical gates
        (inserted SWAPs included) and the final layout."""
        l2p = l2p.copy()
        p2l = np.empty_like(l2p)
        p2l[l2p] = np.arange(len(l2p))
        dag = _Dag(gates)
        indeg = list(dag.indeg)
        front = [i for i, d in enumerate(indeg) if d == 0]
        decay = np.ones(self.n)
        out: list = []
        stall = 0
        valve = 3 * self.n + 10
        n_decay = 0
        while front:
            ready = [i for i in front if not gates[i].is_2q or self._adjacent(l2p, gates[i])]
            if not ready and stall >= valve:
                # release valve: force the closest front gate through
                i = min(front, key=lambda j: (self.dist[l2p[gates[j].qubits[0]], l2p[gates[j].qubits[1]]], j))
                self._route_along_path(l2p, p2l, gates[i], out)
                ready = [i]
            if ready:
                for i in ready:
                    out.append(gates[i].remap(l2p))
                    front.remove(i)
                    for s in dag.succ[i]:
                        indeg[s] -= 1
                        if indeg[s] == 0:
                            front.append(s)
                front.sort()
                decay[:] = 1.0
                stall = 0
                continue
            ext = self._extended(dag, front, indeg)
            front_pairs = np.array([gates[i].qubits for i in front], dtype=np.int64).reshape(-1, 2)
            ext_pairs = np.array([gates[i].qubits for i in ext], dtype=np.int64).reshape(-1, 2)
            active = {int(l2p[q]) for q in front_pairs.ravel()}
            cands = np.array([p for p in self.pairs if p[0] in active or p[1] in active], dtype=np.int64)
            scores = kernels.swap_scores(self.dist, l2p, front_pairs, ext_pairs, cands, EXT_WEIGHT)
            scores = scores * np.maximum(decay[cands[:, 0]], decay[cands[:, 1]])
            best = np.flatnonzero(scores <= scores.min() + 1e-12)
            pa, pb = (int(x) for x in cands[best[self.rng.integers(len(best))]])
            self._apply_swap(l2p, p2l, pa, pb)
            out.append(Gate(GateKind.SWAP, (pa, pb)))
            decay[pa] += DECAY_STEP
            decay[pb] += DECAY_STEP
            n_decay += 1
            if n_decay % DECAY_RESET == 0:
                decay[:] = 1.0
            stall += 1
        return out, l2p

    def greedy(self, gates: list[Gate], l2p: np.ndarray):
        l2p = l2p.copy()
        p2l = np.empty_like(l2p)
        p2l[l2p] = np.arange(len(l2p))
        layers = asap_layers(Circuit(self.n, gates))
        order = sorted(range(len(gates)), key=lambda i: (layers[i], i))
        out: list = []
        for i in order:
            if gates[i].is_2q:
                self._route_along_path(l2p, p2l, gates[i], out)
            out.append(gates[i].remap(l2p))
        return out, l2p


def route(
    c: Circuit,
    hw: HardwareSpec,
    strategy: str = "sabre_lite",
    lookahead: int = DEFAULT_LOOKAHEAD,
    seed: int | None = 0,
) -> RoutingResult:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown routing strategy {strategy!r}; use one of {', '.join(STRATEGIES)}")
    if lookahead < 1:
        raise ValueError("lookahead must be a positive integer")
    if c.n_qubits > hw.n_qubits:
        raise RoutingError(f"circuit width {c.n_qubits} exceeds {hw.n_qubits} device qubits")
    if hw.is_all_to_all:
        ident = tuple(range(c.n_qubits))
        return RoutingResult(c, ident, ident)
    coupling = hw.graph()
    if not coupling.is_connected():
        raise RoutingError("coupling graph is disconnected")
    body, tail = _split_terminal(unroll_3q(c))
    n = hw.n_qubits
    router = _Router(coupling, lookahead, np.random.default_rng(seed))
    start = np.arange(n, dtype=np.int64)
    if strategy == "sabre_lite":
        # reverse-traversal warmup: the layout reached after routing the
        # reversed circuit from the forward pass's end is a good start
        _, mid = router.sabre(body, start)
        _, start = router.sabre(body[::-1], mid)
        ops, final = router.sabre(body, start)
    else:
        ops, final = router.greedy(body, start)

    out: list[Gate] = []
    for g in ops:
        out.extend(_swap_as_cx(*g.qubits) if g.kind is GateKind.SWAP else [g])
    out = fix_polarity(out, coupling)
    out.extend(g.remap(final) for g in tail)
    p_out = np.empty(n, dtype=np.int64)
    p_out[final] = np.arange(n)
    routed = Circuit(n, out, c.n_cbits)
    return RoutingResult(routed, tuple(int(p) for p in start), tuple(int(q) for q in p_out))
