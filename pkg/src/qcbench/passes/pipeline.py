"""Pass registry and pipeline execution."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import jsonschema

from ..circuit import GATESETS, Circuit, Gate, GateKind
from ..hardware import HardwareSpec
from ..sim import EquivalenceReport, check_equivalence, logical_positions
from .peephole import peephole_kak
from .rebase import rebase
from .routing import DEFAULT_LOOKAHEAD, STRATEGIES, RoutingResult, route
from .simplify import commutative_cancellation, drop_negligible, merge_1q, remove_redundancies

_NUMBER = {"type": "number", "minimum": 0}


class PassError(ValueError):
    """Unknown pass or invalid parameters."""


class PipelineError(RuntimeError):
    def __init__(self, stage_index: int, stage_name: str, cause: Exception):
        super().__init__(f"stage {stage_index} ({stage_name}) failed: {cause}")
        self.stage_index = stage_index
        self.stage_name = stage_name


def preprocess(c: Circuit) -> Circuit:
    """Rebase to CX/Rz/Rx and append a barrier plus terminal measures on
    every qubit that is not measured yet."""
    out = rebase(c, "cx_rz_rx")
    measured = {g.qubits[0] for g in out.gates if g.kind is GateKind.Measure}
    missing = [q for q in range(out.n_qubits) if q not in measured]
    if not missing:
        return out
    n_cbits = max(out.n_cbits, out.n_qubits)
    used = {g.cbits[0] for g in out.gates if g.kind is GateKind.Measure}
    free = iter(b for b in range(n_cbits + len(missing)) if b not in used)
    tail = [Gate(GateKind.Barrier, tuple(range(out.n_qubits)))]
    tail += [Gate(GateKind.Measure, (q,), cbits=(next(free),)) for q in missing]
    n_cbits = max(n_cbits, 1 + max(g.cbits[0] for g in tail[1:]))
    return Circuit(out.n_qubits, out.gates + tuple(tail), n_cbits)


@dataclass(frozen=True)
class _PassInfo:
    run: Callable
    schema: dict


def _run_rebase(c, hw, target="hw"):
    return rebase(c, hw.gate_set if target == "hw" else target)


def _run_route(c, hw, strategy="sabre_lite", lookahead=DEFAULT_LOOKAHEAD, seed=0):
    return route(c, hw, strategy=strategy, lookahead=lookahead, seed=seed)


PASSES: dict[str, _PassInfo] = {
    "remove_redundancies": _PassInfo(lambda c, hw: remove_redundancies(c), {}),
    "merge_1q": _PassInfo(lambda c, hw, tol=1e-9: merge_1q(c, tol), {"tol": _NUMBER}),
    "commutative_cancellation": _PassInfo(
        lambda c, hw, commute_rz=False: commutative_cancellation(c, commute_rz),
        {"commute_rz": {"type": "boolean"}},
    ),
    "drop_negligible": _PassInfo(lambda c, hw, tol=1e-8: drop_negligible(c, tol), {"tol": _NUMBER}),
    "peephole_kak": _PassInfo(lambda c, hw: peephole_kak(c, hw), {}),
    "rebase": _PassInfo(_run_rebase, {"target": {"enum": ["hw", *GATESETS]}}),
    "route": _PassInfo(
        _run_route,
        {
            "strategy": {"enum": list(STRATEGIES)},
            "lookahead": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
        },
    ),
    "preprocess": _PassInfo(lambda c, hw: preprocess(c), {}),
}
PASS_NAMES = tuple(PASSES)


def params_schema(name: str) -> dict:
    return {
        "type": "object",
        "properties": PASSES[name].schema,
        "additionalProperties": False,
    }


@dataclass(frozen=True)
class PassSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in PASSES:
            raise PassError(f"unknown pass {self.name!r}; supported: {', '.join(PASS_NAMES)}")
        try:
            jsonschema.validate(dict(self.params), params_schema(self.name))
        except jsonschema.ValidationError as exc:
            raise PassError(f"pass {self.name}: invalid params: {exc.message}") from None
        object.__setattr__(self, "params", dict(self.params))

    @classmethod
    def parse(cls, item) -> "PassSpec":
        """From ``"name"`` or ``{"name": ..., "params": {...}}``."""
        if isinstance(item, PassSpec):
            return item
        if isinstance(item, str):
            return cls(item)
        return cls(item["name"], item.get("params", {}))

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}

    @property
    def label(self) -> str:
        if self.name == "rebase":
            return f"rebase_{self.params.get('target', 'hw')}"
        return self.name

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.params.items()))))


@dataclass(frozen=True)
class StageRecord:
    """``positions[i]`` is the qubit of ``circuit`` holding input qubit ``i``."""

    index: int
    name: str
    circuit: Circuit
    seconds: float
    positions: tuple[int, ...]
    routing: RoutingResult | None = None


def run_pass(spec: PassSpec, c: Circuit, hw: HardwareSpec):
    return PASSES[spec.name].run(c, hw, **spec.params)


def run_pipeline(c: Circuit, stages, hw: HardwareSpec) -> list[StageRecord]:
    """Apply ``stages`` in order; the first record is the untouched input."""
    specs = [PassSpec.parse(s) for s in stages]
    positions = tuple(range(c.n_qubits))
    records = [StageRecord(0, "target", c, 0.0, positions)]
    cur = c
    for i, spec in enumerate(specs, start=1):
        t0 = time.perf_counter()
        try:
            res = run_pass(spec, cur, hw)
        except Exception as exc:
            raise PipelineError(i, spec.label, exc) from exc
        seconds = time.perf_counter() - t0
        routing = None
        if isinstance(res, RoutingResult):
            routing = res
            where = logical_positions(res.p_out, cur.n_qubits)
            positions = tuple(where[p] for p in positions)
            res = res.circuit
        cur = res
        records.append(StageRecord(i, spec.label, cur, seconds, positions, routing))
    return records


def verify_record(original: Circuit, record: StageRecord, threshold: float = 1e-9) -> EquivalenceReport:
    return check_equivalence(original, record.circuit, threshold=threshold, positions=record.positions)
