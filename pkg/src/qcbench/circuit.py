"""Circuit intermediate representation.

Gates are immutable records over integer qubit indices.  Qubit 0 is the least
significant bit everywhere in the package (statevectors, unitaries, bitstrings).
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx

ANGLE_TOL = 1e-9
TWO_PI = 2.0 * math.pi


class GateKind(enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    S = "s"
    Sdg = "sdg"
    T = "t"
    Tdg = "tdg"
    Rx = "rx"
    Ry = "ry"
    Rz = "rz"
    U1 = "u1"
    U2 = "u2"
    U3 = "u3"
    CX = "cx"
    CZ = "cz"
    XX = "rxx"
    SWAP = "swap"
    CCX = "ccx"
    Measure = "measure"
    Barrier = "barrier"

    @property
    def n_params(self) -> int:
        return _N_PARAMS.get(self, 0)

    @property
    def n_qubits(self) -> int | None:
        """Fixed qubit arity, or ``None`` for Barrier."""
        if self is GateKind.Barrier:
            return None
        if self in TWO_QUBIT_KINDS:
            return 2
        if self is GateKind.CCX:
            return 3
        return 1

    @property
    def is_unitary(self) -> bool:
        return self not in (GateKind.Measure, GateKind.Barrier)

    @classmethod
    def from_name(cls, name: str) -> "GateKind":
        try:
            return _BY_NAME[name.lower()]
        except KeyError:
            raise ValueError(f"unknown gate kind {name!r}") from None


_N_PARAMS = {
    GateKind.Rx: 1,
    GateKind.Ry: 1,
    GateKind.Rz: 1,
    GateKind.U1: 1,
    GateKind.U2: 2,
    GateKind.U3: 3,
    GateKind.XX: 1,
}
_BY_NAME = {k.value: k for k in GateKind}
_BY_NAME.update({k.name.lower(): k for k in GateKind})

ONE_QUBIT_KINDS = frozenset(
    {
        GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.S, GateKind.Sdg,
        GateKind.T, GateKind.Tdg, GateKind.Rx, GateKind.Ry, GateKind.Rz,
        GateKind.U1, GateKind.U2, GateKind.U3,
    }
)
TWO_QUBIT_KINDS = frozenset({GateKind.CX, GateKind.CZ, GateKind.XX, GateKind.SWAP})
THREE_QUBIT_KINDS = frozenset({GateKind.CCX})
ROTATION_KINDS = frozenset({GateKind.Rx, GateKind.Ry, GateKind.Rz, GateKind.U1, GateKind.XX})
# diagonal in the computational basis
DIAGONAL_KINDS = frozenset(
    {GateKind.Z, GateKind.S, GateKind.Sdg, GateKind.T, GateKind.Tdg, GateKind.Rz,
     GateKind.U1, GateKind.CZ}
)
SELF_INVERSE_KINDS = frozenset(
    {GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.CX, GateKind.CZ,
     GateKind.SWAP, GateKind.CCX}
)
SYMMETRIC_KINDS = frozenset({GateKind.CZ, GateKind.XX, GateKind.SWAP})


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    cbits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "cbits", tuple(int(c) for c in self.cbits))
        arity = self.kind.n_qubits
        if arity is not None and len(self.qubits) != arity:
            raise ValueError(f"{self.kind.name} acts on {arity} qubit(s), got {self.qubits}")
        if not self.qubits:
            raise ValueError(f"{self.kind.name} needs at least one qubit")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.kind.name}{self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError("negative qubit index")
        if len(self.params) != self.kind.n_params:
            raise ValueError(
                f"{self.kind.name} takes {self.kind.n_params} parameter(s), got {len(self.params)}"
            )
        if self.kind is GateKind.Measure:
            if len(self.cbits) != 1:
                raise ValueError("Measure needs exactly one classical bit")
        elif self.cbits:
            raise ValueError("only Measure carries classical bits")

    @property
    def is_1q(self) -> bool:
        return self.kind in ONE_QUBIT_KINDS

    @property
    def is_2q(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS

    def remap(self, mapping: Sequence[int] | dict) -> "Gate":
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.params, self.cbits)

    def __repr__(self) -> str:
        args = ",".join(f"{p:.6g}" for p in self.params)
        head = f"{self.kind.name}({args})" if args else self.kind.name
        tail = f"->{self.cbits[0]}" if self.cbits else ""
        return f"{head}{list(self.qubits)}{tail}"


def gate(kind: GateKind | str, *qubits: int, params: Iterable[float] = (), cbit: int | None = None) -> Gate:
    """Shorthand constructor: ``gate("cx", 0, 1)``, ``gate("rz", 0, params=[0.3])``."""
    if isinstance(kind, str):
        kind = GateKind.from_name(kind)
    cbits = () if cbit is None else (cbit,)
    return Gate(kind, tuple(qubits), tuple(params), cbits)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    n_cbits: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        if self.n_cbits < 0:
            raise ValueError("negative classical register size")
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits:
                raise ValueError(f"{g!r} exceeds register of {self.n_qubits} qubits")
            if g.cbits and max(g.cbits) >= self.n_cbits:
                raise ValueError(f"{g!r} exceeds classical register of {self.n_cbits} bits")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return Circuit(self.n_qubits, tuple(gates), self.n_cbits)

    @property
    def has_measure(self) -> bool:
        return any(g.kind is GateKind.Measure for g in self.gates)

    def kind_counts(self) -> Counter:
        return Counter(g.kind for g in self.gates)


# -- gate classes -----------------------------------------------------------

GATE_CLASSES = ("all", "1q", "2q", "3q")


def _class_predicate(cls):
    if isinstance(cls, GateKind):
        return lambda g: g.kind is cls
    if isinstance(cls, str):
        key = cls.lower()
        if key in ("all", "unitary"):
            return lambda g: g.kind.is_unitary
        if key == "1q":
            return lambda g: g.kind in ONE_QUBIT_KINDS
        if key == "2q":
            return lambda g: g.kind in TWO_QUBIT_KINDS
        if key == "3q":
            return lambda g: g.kind in THREE_QUBIT_KINDS
        return _class_predicate(GateKind.from_name(key))
    raise TypeError(f"bad gate class {cls!r}")


def gate_count(c: Circuit, cls: GateKind | str = "all") -> int:
    """Number of gates in class ``cls``.  Measure and Barrier never count toward
    the aggregate classes."""
    pred = _class_predicate(cls)
    return sum(1 for g in c.gates if pred(g))


def asap_layers(c: Circuit) -> list[int]:
    """ASAP layer index (1-based) of every gate; 0 for barriers.

    A barrier synchronises the frontiers of its qubits and occupies no layer.
    """
    qlevel = [0] * c.n_qubits
    clevel = [0] * max(c.n_cbits, 1)
    layers = []
    for g in c.gates:
        if g.kind is GateKind.Barrier:
            lvl = max(qlevel[q] for q in g.qubits)
            for q in g.qubits:
                qlevel[q] = lvl
            layers.append(0)
            continue
        lvl = max(qlevel[q] for q in g.qubits)
        for b in g.cbits:
            lvl = max(lvl, clevel[b])
        lvl += 1
        for q in g.qubits:
            qlevel[q] = lvl
        for b in g.cbits:
            clevel[b] = lvl
        layers.append(lvl)
    return layers


def depth(c: Circuit, cls: GateKind | str = "all") -> int:
    """Number of ASAP layers containing at least one gate of class ``cls``.

    Layers are computed over the whole circuit.  With ``cls="all"`` measurement
    layers count; ``cls="unitary"`` counts unitary layers only.
    """
    if isinstance(cls, str) and cls.lower() == "all":
        pred = lambda g: g.kind is not GateKind.Barrier  # noqa: E731
    else:
        pred = _class_predicate(cls)
    layers = asap_layers(c)
    return len({lvl for g, lvl in zip(c.gates, layers) if lvl and pred(g)})


class UndefinedDensityError(ValueError):
    pass


def gate_density(c: Circuit, cls: GateKind | str) -> float:
    total = gate_count(c, "all")
    if total == 0:
        raise UndefinedDensityError("gate density of an empty circuit is undefined")
    return gate_count(c, cls) / total


def dag_view(c: Circuit) -> nx.DiGraph:
    """Dependency DAG; node ``i`` is ``c.gates[i]`` and each edge carries the
    set of shared wires (``("q", i)`` or ``("c", j)``) in its ``wires`` attribute."""
    dag = nx.DiGraph()
    last: dict[tuple[str, int], int] = {}
    for i, g in enumerate(c.gates):
        dag.add_node(i, gate=g)
        wires = [("q", q) for q in g.qubits] + [("c", b) for b in g.cbits]
        for w in wires:
            if w in last:
                j = last[w]
                if dag.has_edge(j, i):
                    dag[j][i]["wires"].add(w)
                else:
                    dag.add_edge(j, i, wires={w})
            last[w] = i
    return dag


# -- angle helpers ----------------------------------------------------------

def wrap_angle(theta: float) -> float:
    """Map to (-pi, pi]."""
    t = math.remainder(theta, TWO_PI)
    if t <= -math.pi:
        t += TWO_PI
    return t


def angle_is_zero(theta: float, tol: float = ANGLE_TOL) -> bool:
    return abs(math.remainder(theta, TWO_PI)) < tol


def angles_equal(a: float, b: float, tol: float = ANGLE_TOL) -> bool:
    return angle_is_zero(a - b, tol)


# -- gate sets --------------------------------------------------------------

class ParamConstraint(enum.Enum):
    ANY = "any"
    HALF_PI = "multiples_of_half_pi"
    PHASED_X = "phased_x"  # U3 with phi + lambda == 0, i.e. R(theta, phi)


@dataclass(frozen=True)
class GateSet:
    name: str
    members: frozenset = field(default_factory=frozenset)  # of (GateKind, ParamConstraint)

    def kinds(self) -> frozenset:
        return frozenset(k for k, _ in self.members)

    def two_qubit_kind(self) -> GateKind:
        kinds = [k for k, _ in self.members if k in TWO_QUBIT_KINDS]
        if len(kinds) != 1:
            raise ValueError(f"gate set {self.name} has no unique entangling gate")
        return kinds[0]

    def contains(self, g: Gate, tol: float = ANGLE_TOL) -> bool:
        if not g.kind.is_unitary:
            return True
        for kind, constraint in self.members:
            if kind is not g.kind:
                continue
            if constraint is ParamConstraint.ANY:
                return True
            if constraint is ParamConstraint.HALF_PI:
                if all(abs(math.remainder(p, math.pi / 2)) < tol for p in g.params):
                    return True
            elif constraint is ParamConstraint.PHASED_X:
                if angle_is_zero(g.params[1] + g.params[2], tol):
                    return True
        return False

    def __contains__(self, g: Gate) -> bool:
        return self.contains(g)


def _gs(name, *members):
    out = []
    for m in members:
        out.append(m if isinstance(m, tuple) else (m, ParamConstraint.ANY))
    return GateSet(name, frozenset(out))


GATESETS = {
    "cx_u3": _gs("cx_u3", GateKind.CX, GateKind.U3),
    "cx_rz_rx": _gs("cx_rz_rx", GateKind.CX, GateKind.Rz, GateKind.Rx),
    "cz_rz_rx90": _gs("cz_rz_rx90", GateKind.CZ, GateKind.Rz, (GateKind.Rx, ParamConstraint.HALF_PI)),
    "cz_rz_phasedx": _gs("cz_rz_phasedx", GateKind.CZ, GateKind.Rz, (GateKind.U3, ParamConstraint.PHASED_X)),
    "xx_rz_rx": _gs("xx_rz_rx", GateKind.XX, GateKind.Rz, GateKind.Rx),
}


def get_gateset(name: str | GateSet) -> GateSet:
    if isinstance(name, GateSet):
        return name
    try:
        return GATESETS[name]
    except KeyError:
        raise ValueError(f"unknown gate set {name!r}; known: {sorted(GATESETS)}") from None
