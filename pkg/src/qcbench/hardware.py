"""Hardware descriptions: native gate set, coupling graph, fidelities, depth penalty."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

from .circuit import Circuit, GateKind, GateSet, TWO_QUBIT_KINDS, THREE_QUBIT_KINDS, get_gateset

K_REGULAR_RETRIES = 10_000


class HardwareError(ValueError):
    pass


@dataclass(frozen=True)
class CouplingGraph:
    n_nodes: int
    edges: frozenset = field(default_factory=frozenset)
    directed: bool = False

    def __post_init__(self):
        if self.n_nodes < 1:
            raise HardwareError("a coupling graph needs at least one node")
        canon = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise HardwareError(f"self-loop on node {a}")
            if not (0 <= a < self.n_nodes and 0 <= b < self.n_nodes):
                raise HardwareError(f"edge ({a}, {b}) outside 0..{self.n_nodes - 1}")
            canon.add((a, b) if self.directed else (min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(canon))

    @classmethod
    def from_edges(cls, n_nodes: int, edges, directed: bool = False) -> "CouplingGraph":
        return cls(n_nodes, frozenset(tuple(e) for e in edges), directed)

    @classmethod
    def complete(cls, n_nodes: int) -> "CouplingGraph":
        return cls(n_nodes, frozenset((a, b) for a in range(n_nodes) for b in range(a + 1, n_nodes)))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def has_edge(self, a: int, b: int, respect_direction: bool = True) -> bool:
        if self.directed:
            return (a, b) in self.edges or (not respect_direction and (b, a) in self.edges)
        return (min(a, b), max(a, b)) in self.edges

    def undirected_pairs(self) -> list[tuple[int, int]]:
        return sorted({(min(a, b), max(a, b)) for a, b in self.edges})

    def degrees(self) -> list[int]:
        deg = [0] * self.n_nodes
        for a, b in self.undirected_pairs():
            deg[a] += 1
            deg[b] += 1
        return deg

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_edges_from(self.undirected_pairs())
        return g

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())

    def is_complete(self) -> bool:
        n = self.n_nodes
        return len(self.undirected_pairs()) == n * (n - 1) // 2

    def distance_matrix(self) -> np.ndarray:
        """All-pairs hop distances ignoring direction (BFS)."""
        n = self.n_nodes
        adj = [[] for _ in range(n)]
        for a, b in self.undirected_pairs():
            adj[a].append(b)
            adj[b].append(a)
        dist = np.full((n, n), np.inf)
        for s in range(n):
            dist[s, s] = 0
            dq = deque([s])
            while dq:
                u = dq.popleft()
                for v in adj[u]:
                    if dist[s, v] == np.inf:
                        dist[s, v] = dist[s, u] + 1
                        dq.append(v)
        return dist


@dataclass(frozen=True)
class HardwareSpec:
    """``coupling=None`` means all-to-all connectivity."""

    name: str
    n_qubits: int
    gate_set: GateSet
    coupling: CouplingGraph | None
    f1q: float
    f2q: float
    depth_penalty_k: float

    def __post_init__(self):
        for label, v in (("f1q", self.f1q), ("f2q", self.f2q), ("k", self.depth_penalty_k)):
            if not 0.0 < v <= 1.0:
                raise HardwareError(f"{label}={v} must lie in (0, 1]")
        if self.coupling is not None and self.coupling.n_nodes != self.n_qubits:
            raise HardwareError("coupling graph size differs from n_qubits")

    @property
    def is_all_to_all(self) -> bool:
        return self.coupling is None or (not self.coupling.directed and self.coupling.is_complete())

    def graph(self) -> CouplingGraph:
        return self.coupling if self.coupling is not None else CouplingGraph.complete(self.n_qubits)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "n_qubits": self.n_qubits,
            "gateset": self.gate_set.name,
            "edges": "all2all" if self.coupling is None else [list(e) for e in self.coupling.sorted_edges()],
            "f1q": self.f1q,
            "f2q": self.f2q,
            "k": self.depth_penalty_k,
        }
        if self.coupling is not None and self.coupling.directed:
            d["directed"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "HardwareSpec":
        edges = d["edges"]
        n = int(d["n_qubits"])
        coupling = None if edges == "all2all" else CouplingGraph.from_edges(n, edges, bool(d.get("directed", False)))
        return cls(d["name"], n, get_gateset(d["gateset"]), coupling,
                   float(d["f1q"]), float(d["f2q"]), float(d["k"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HardwareSpec":
        return cls.from_dict(json.loads(text))

    def with_coupling(self, coupling: CouplingGraph | None, name: str | None = None) -> "HardwareSpec":
        n = self.n_qubits if coupling is None else coupling.n_nodes
        return HardwareSpec(name or self.name, n, self.gate_set, coupling, self.f1q, self.f2q, self.depth_penalty_k)


# -- preset topologies ------------------------------------------------------

def ladder_edges(cols: int) -> list[tuple[int, int]]:
    """2 x cols ladder, rows 0..cols-1 and cols..2cols-1."""
    e = []
    for r in range(2):
        e += [(r * cols + i, r * cols + i + 1) for i in range(cols - 1)]
    e += [(i, cols + i) for i in range(cols)]
    return e


FALCON_27_EDGES = [
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7), (7, 10), (8, 9),
    (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14), (14, 16), (15, 18),
    (16, 19), (17, 18), (18, 21), (19, 20), (19, 22), (21, 23), (22, 25), (23, 24),
    (24, 25), (25, 26),
]


def aspen_edges() -> list[tuple[int, int]]:
    """Two 8-rings (0-7, 8-15) joined by two couplers."""
    ring = lambda off: [(off + i, off + (i + 1) % 8) for i in range(8)]  # noqa: E731
    return ring(0) + ring(8) + [(1, 14), (2, 13)]


def sycamore_edges() -> list[tuple[int, int]]:
    """9 x 6 grid with diagonal couplers between adjacent rows, minus node 53."""
    rows, cols = 9, 6
    idx = lambda r, c: r * cols + c  # noqa: E731
    e = []
    for r in range(rows - 1):
        for c in range(cols):
            e.append((idx(r, c), idx(r + 1, c)))
            c2 = c + 1 if r % 2 == 0 else c - 1
            if 0 <= c2 < cols:
                e.append((idx(r, c), idx(r + 1, c2)))
    drop = rows * cols - 1
    return [(a, b) for a, b in e if drop not in (a, b)]


_PRESETS = {
    "mock-ibm-all2all-10q": ("cx_u3", 10, None, 0.9990, 0.990, 0.995),
    "ibm-falcon-27q": ("cx_u3", 27, FALCON_27_EDGES, 0.9996, 0.990, 0.995),
    "ibm-rueschlikon-16q": ("cx_u3", 16, ladder_edges(8), 0.9970, 0.960, 0.995),
    "rigetti-aspen-16q": ("cz_rz_rx90", 16, aspen_edges(), 0.9980, 0.950, 0.995),
    "google-sycamore-53q": ("cz_rz_phasedx", 53, sycamore_edges(), 0.9995, 0.991, 0.995),
    "ionq-32q": ("xx_rz_rx", 32, None, 0.9998, 0.990, 0.995),
}
PRESET_NAMES = tuple(_PRESETS)


def preset(name: str, edges=None) -> HardwareSpec:
    """Named device; ``edges`` optionally overrides the coupling graph."""
    try:
        gs, n, default_edges, f1, f2, k = _PRESETS[name]
    except KeyError:
        raise HardwareError(f"unknown hardware preset {name!r}; known: {', '.join(PRESET_NAMES)}") from None
    e = default_edges if edges is None else edges
    coupling = None if e is None or e == "all2all" else CouplingGraph.from_edges(n, e)
    if coupling is not None and not coupling.is_connected():
        raise HardwareError(f"coupling graph of {name} is disconnected")
    return HardwareSpec(name, n, get_gateset(gs), coupling, f1, f2, k)


def parse_edge_list(text: str) -> list[tuple[int, int]]:
    edges = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise HardwareError(f"edge list line {ln}: expected 'u v', got {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return edges


def load_edge_list(path: str | Path) -> list[tuple[int, int]]:
    return parse_edge_list(Path(path).read_text())


# -- random regular graphs ----------------------------------------------------

def _random_regular_edges(n: int, k: int, rng: np.random.Generator) -> set | None:
    """One attempt of incremental stub pairing avoiding loops and multi-edges."""
    if k == 0:
        return set()
    stubs = [v for v in range(n) for _ in range(k)]
    edges: set = set()
    while stubs:
        arr = np.array(stubs)
        found = False
        for _ in range(50):
            i, j = rng.choice(len(arr), size=2, replace=False)
            a, b = int(arr[i]), int(arr[j])
            if a != b and (min(a, b), max(a, b)) not in edges:
                found = True
                break
        if not found:
            # exhaustive check before declaring a dead end
            pairs = [
                (i, j)
                for i in range(len(arr))
                for j in range(i + 1, len(arr))
                if arr[i] != arr[j] and (min(arr[i], arr[j]), max(arr[i], arr[j])) not in edges
            ]
            if not pairs:
                return None
            i, j = pairs[int(rng.integers(len(pairs)))]
            a, b = int(arr[i]), int(arr[j])
        edges.add((min(a, b), max(a, b)))
        for idx in sorted((i, j), reverse=True):
            stubs.pop(int(idx))
    return edges


def k_regular_graph(n: int, k: int, seed=None) -> CouplingGraph:
    """Random connected simple k-regular graph on n nodes, deterministic per seed."""
    if not 2 <= k < n:
        raise HardwareError(f"need 2 <= k < n, got n={n}, k={k}")
    if (n * k) % 2:
        raise HardwareError(f"no {k}-regular graph on {n} nodes (n*k odd)")
    if k == n - 1:
        return CouplingGraph.complete(n)
    rng = np.random.default_rng(seed)
    # dense graphs are generated as complements of sparse ones
    complement = k > (n - 1) / 2
    kk = n - 1 - k if complement else k
    for _ in range(K_REGULAR_RETRIES):
        edges = _random_regular_edges(n, kk, rng)
        if edges is None:
            continue
        if complement:
            edges = {(a, b) for a in range(n) for b in range(a + 1, n)} - edges
        g = CouplingGraph(n, frozenset(edges))
        if g.is_connected():
            return g
    raise HardwareError(f"failed to generate a connected {k}-regular graph on {n} nodes")


def validate_connectivity(c: Circuit, g: CouplingGraph | HardwareSpec | None, directed: bool | None = None) -> list[int]:
    """Indices of multi-qubit gates whose qubits are not coupled.

    With ``directed`` true, CX must follow an edge's orientation."""
    if isinstance(g, HardwareSpec):
        g = g.coupling
        if g is None:
            return []
    if g is None:
        return []
    if c.n_qubits > g.n_nodes:
        raise HardwareError(f"circuit width {c.n_qubits} exceeds {g.n_nodes} device qubits")
    if directed is None:
        directed = g.directed
    bad = []
    for i, gt in enumerate(c.gates):
        if gt.kind in THREE_QUBIT_KINDS:
            bad.append(i)
        elif gt.kind in TWO_QUBIT_KINDS:
            a, b = gt.qubits
            strict = directed and gt.kind is GateKind.CX
            if not g.has_edge(a, b, respect_direction=strict):
                bad.append(i)
    return bad
