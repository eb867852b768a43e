"""Target circuits: random generation, QASM corpora and gate-order randomisation.

All randomness flows through ``numpy.random.Generator`` (PCG64) seeded from
``numpy.random.SeedSequence``; child streams are keyed by integer tuples so a
given (master seed, index...) always yields the same circuit on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import (
    ONE_QUBIT_KINDS,
    SYMMETRIC_KINDS,
    TWO_QUBIT_KINDS,
    Circuit,
    Gate,
    GateKind,
)
from .qasm import load_qasm

TARGET_TYPES = ("random", "qasm_dir", "shuffled", "fully_randomized")
PROB_TOL = 1e-12


class TargetError(ValueError):
    pass


def child_rng(*key: int) -> np.random.Generator:
    """Generator for the stream identified by a tuple of nonnegative ints."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class RandomSpec:
    n_qubits: int
    total_gates: int
    gate_probs: dict = field(default_factory=dict)
    seed: int | None = 0

    def __post_init__(self):
        probs = {}
        for k, p in dict(self.gate_probs).items():
            kind = k if isinstance(k, GateKind) else GateKind.from_name(k)
            if kind not in ONE_QUBIT_KINDS and kind not in TWO_QUBIT_KINDS:
                raise TargetError(f"random circuits take 1Q or 2Q gates only, got {kind.value}")
            if not p >= 0:
                raise TargetError(f"negative probability for {kind.value}")
            probs[kind] = probs.get(kind, 0.0) + float(p)
        if not probs or abs(sum(probs.values()) - 1.0) > PROB_TOL:
            raise TargetError(f"gate probabilities must sum to 1, got {sum(probs.values())!r}")
        if self.total_gates < 0:
            raise TargetError("total_gates must be nonnegative")
        if self.n_qubits < 1:
            raise TargetError("n_qubits must be positive")
        if self.n_qubits < 2 and any(p > 0 for k, p in probs.items() if k in TWO_QUBIT_KINDS):
            raise TargetError("two-qubit gates need at least 2 qubits")
        object.__setattr__(self, "gate_probs", probs)


def haar_u3_angles(rng: np.random.Generator) -> tuple[float, float, float]:
    theta = 2.0 * math.asin(math.sqrt(rng.random()))
    phi, lam = rng.uniform(0.0, 2.0 * math.pi, 2)
    return theta, float(phi), float(lam)


def _random_params(kind: GateKind, rng: np.random.Generator) -> tuple[float, ...]:
    if kind is GateKind.U3:
        return haar_u3_angles(rng)
    return tuple(float(x) for x in rng.uniform(0.0, 2.0 * math.pi, kind.n_params))


def _random_placement(kind: GateKind, n: int, rng: np.random.Generator) -> tuple[int, ...]:
    k = kind.n_qubits
    qs = [int(q) for q in rng.choice(n, size=k, replace=False)]
    return tuple(sorted(qs)) if kind in SYMMETRIC_KINDS else tuple(qs)


def random_circuit(spec: RandomSpec) -> Circuit:
    rng = _as_rng(spec.seed)
    kinds = list(spec.gate_probs)
    p = np.array([spec.gate_probs[k] for k in kinds])
    picks = rng.choice(len(kinds), size=spec.total_gates, p=p / p.sum())
    gates = []
    for i in picks:
        kind = kinds[i]
        qubits = _random_placement(kind, spec.n_qubits, rng)
        gates.append(Gate(kind, qubits, _random_params(kind, rng)))
    return Circuit(spec.n_qubits, gates)


def _split_body(c: Circuit) -> tuple[list[Gate], list[Gate]]:
    """Gates before the first Measure/Barrier, and the terminal block."""
    cut = next((i for i, g in enumerate(c.gates) if not g.kind.is_unitary), len(c.gates))
    body, tail = list(c.gates[:cut]), list(c.gates[cut:])
    if any(g.kind.is_unitary for g in tail):
        raise TargetError("Measure/Barrier inside the region to randomise")
    return body, tail


def shuffle_gates(c: Circuit, seed=None) -> Circuit:
    """Uniformly permute the gate order; the terminal readout block stays put."""
    body, tail = _split_body(c)
    rng = _as_rng(seed)
    order = rng.permutation(len(body))
    return c.with_gates([body[i] for i in order] + tail)


def full_randomize(c: Circuit, seed=None) -> Circuit:
    """Shuffle and also re-place every gate on random qubits, keeping angles."""
    body, tail = _split_body(c)
    rng = _as_rng(seed)
    order = rng.permutation(len(body))
    out = []
    for i in order:
        g = body[i]
        out.append(Gate(g.kind, _random_placement(g.kind, c.n_qubits, rng), g.params))
    return c.with_gates(out + tail)


def load_qasm_dir(path: str | Path) -> list[tuple[str, Circuit]]:
    root = Path(path)
    if not root.is_dir():
        raise TargetError(f"target directory {root} is not readable")
    files = sorted(root.rglob("*.qasm"))
    if not files:
        raise TargetError(f"no *.qasm files under {root}")
    return [(str(f.relative_to(root).with_suffix("")), load_qasm(f)) for f in files]


def samples_dir() -> Path:
    return Path(__file__).resolve().parent / "data" / "samples"


def resolve_target(spec: dict, key: tuple[int, ...] = (0,), base_dir: str | Path = ".") -> list[tuple[str, Circuit]]:
    """Expand one target description into named circuits.

    ``key`` identifies the random stream; instance ``i`` uses ``key + (i,)``."""
    kind = spec.get("type")
    params = spec.get("params", {})
    if kind == "random":
        count = int(params.get("count", 1))
        out = []
        for i in range(count):
            rs = RandomSpec(
                params["n_qubits"], params["total_gates"], params["gate_probs"],
                seed=np.random.SeedSequence([*key, i]),
            )
            out.append((f"random_{i}", random_circuit(rs)))
        return out
    if kind == "qasm_dir":
        raw = params["path"]
        path = samples_dir() if raw == "@samples" else Path(base_dir) / raw
        return load_qasm_dir(path)
    if kind in ("shuffled", "fully_randomized"):
        source = resolve_target(params["source"], key + (0,), base_dir)
        fn = shuffle_gates if kind == "shuffled" else full_randomize
        count = int(params.get("count", 1))
        out = []
        for name, circ in source:
            for i in range(count):
                rng = child_rng(*key, 1, len(out))
                out.append((f"{name}~{kind}_{i}", fn(circ, rng)))
        return out
    raise TargetError(f"unknown target type {kind!r}; supported: {', '.join(TARGET_TYPES)}")
