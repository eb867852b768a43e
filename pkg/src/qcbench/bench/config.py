"""Experiment configuration: JSON schema, loading and resolution into a plan."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from ..circuit import GATESETS, Circuit
from ..hardware import HardwareError, HardwareSpec, k_regular_graph, load_edge_list, preset
from ..passes.pipeline import PassError, PassSpec
from ..qasm import QasmError
from ..targets import TARGET_TYPES, TargetError, resolve_target

DEFAULT_OPTIONS = {
    "threshold": 1e-9,
    "dump_stages": False,
    "jobs": 1,
    "verify_max_qubits": 15,
}

_PASS = {
    "oneOf": [
        {"type": "string"},
        {
            "type": "object",
            "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
            "required": ["name"],
            "additionalProperties": False,
        },
    ]
}

_TARGET = {
    "type": "object",
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "type": {"enum": list(TARGET_TYPES)},
        "params": {"type": "object"},
    },
    "required": ["type"],
    "additionalProperties": False,
}

_HARDWARE = {
    "oneOf": [
        {"type": "string"},
        {
            "type": "object",
            "properties": {
                "preset": {"type": "string"},
                "name": {"type": "string"},
                "edges": {
                    "oneOf": [
                        {"const": "all2all"},
                        {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0},
                                                    "minItems": 2, "maxItems": 2}},
                        {
                            "type": "object",
                            "properties": {"k_regular": {"type": "integer", "minimum": 2},
                                           "seed": {"type": "integer", "minimum": 0}},
                            "required": ["k_regular"],
                            "additionalProperties": False,
                        },
                        {
                            "type": "object",
                            "properties": {"file": {"type": "string"}},
                            "required": ["file"],
                            "additionalProperties": False,
                        },
                    ]
                },
            },
            "required": ["preset"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "name": {"type": "string"},
                "n_qubits": {"type": "integer", "minimum": 1},
                "gateset": {"enum": list(GATESETS)},
                "edges": {"oneOf": [{"const": "all2all"}, {"type": "array"}]},
                "directed": {"type": "boolean"},
                "f1q": {"type": "number"},
                "f2q": {"type": "number"},
                "k": {"type": "number"},
            },
            "required": ["name", "n_qubits", "gateset", "edges", "f1q", "f2q", "k"],
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "experiment_id": {"type": "string", "minLength": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "targets": {"type": "array", "items": _TARGET, "minItems": 1},
        "hardware": {"type": "array", "items": _HARDWARE, "minItems": 1},
        "pipelines": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "stages": {"type": "array", "items": _PASS},
                },
                "required": ["name", "stages"],
                "additionalProperties": False,
            },
        },
        "options": {
            "type": "object",
            "properties": {
                "threshold": {"type": "number", "exclusiveMinimum": 0},
                "dump_stages": {"type": "boolean"},
                "jobs": {"type": "integer", "minimum": 1},
                "verify_max_qubits": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "search": {
            "type": "object",
            "properties": {
                "subroutines": {"type": "array", "items": _PASS, "minItems": 1},
                "max_depth": {"type": "integer", "minimum": 1},
                "objective": {"type": "string"},
                "budget": {"type": "integer", "minimum": 1},
            },
            "required": ["subroutines"],
            "additionalProperties": False,
        },
    },
    "required": ["targets", "hardware", "pipelines"],
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Invalid configuration; ``pointer`` is a JSON pointer into the document."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


@dataclass(frozen=True)
class SearchSpec:
    subroutines: tuple[PassSpec, ...]
    max_depth: int
    objective: str = "gc_2q"
    budget: int = 100_000


@dataclass(frozen=True)
class Cell:
    index: int
    target_id: str
    circuit: Circuit
    hardware: HardwareSpec
    pipeline: str
    stages: tuple[PassSpec, ...]


@dataclass
class ExperimentPlan:
    experiment_id: str
    master_seed: int
    targets: list  # (target_id, Circuit)
    hardware: list  # HardwareSpec
    pipelines: list  # (name, tuple of PassSpec)
    options: dict = field(default_factory=lambda: dict(DEFAULT_OPTIONS))
    search: SearchSpec | None = None

    def cells(self) -> list[Cell]:
        out = []
        for i, ((tid, circ), hw, (pname, stages)) in enumerate(
            itertools.product(self.targets, self.hardware, self.pipelines)
        ):
            out.append(Cell(i, tid, circ, hw, pname, stages))
        return out


def _resolve_hardware(entry, ptr: str, base_dir: Path) -> HardwareSpec:
    try:
        if isinstance(entry, str):
            return preset(entry)
        if "preset" not in entry:
            return HardwareSpec.from_dict(entry)
        hw = preset(entry["preset"])
        edges = entry.get("edges")
        if isinstance(edges, dict) and "k_regular" in edges:
            k = edges["k_regular"]
            g = k_regular_graph(hw.n_qubits, k, seed=edges.get("seed", 0))
            hw = hw.with_coupling(g, name=f"{hw.name}-k{k}")
        elif isinstance(edges, dict):
            hw = preset(hw.name, load_edge_list(base_dir / edges["file"]))
        elif edges is not None:
            hw = preset(hw.name, edges)
        if "name" in entry:
            hw = hw.with_coupling(hw.coupling, name=entry["name"])
        return hw
    except (HardwareError, ValueError, KeyError, OSError) as exc:
        raise ConfigError(str(exc), ptr) from None


def _resolve_pass(item, ptr: str) -> PassSpec:
    try:
        return PassSpec.parse(item)
    except PassError as exc:
        raise ConfigError(str(exc), ptr) from None


def plan_from_dict(doc: dict, base_dir: str | Path = ".") -> ExperimentPlan:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        raise ConfigError(err.message, _pointer(err.absolute_path))
    base_dir = Path(base_dir)
    seed = int(doc.get("master_seed", 0))

    targets = []
    for i, t in enumerate(doc["targets"]):
        try:
            named = resolve_target(t, key=(seed, i), base_dir=base_dir)
        except (TargetError, QasmError, KeyError, ValueError, OSError) as exc:
            raise ConfigError(str(exc), f"/targets/{i}") from None
        prefix = t.get("id", f"t{i}")
        targets += [(f"{prefix}/{name}", c) for name, c in named]

    hardware = [_resolve_hardware(h, f"/hardware/{i}", base_dir) for i, h in enumerate(doc["hardware"])]

    pipelines = []
    names = set()
    for i, p in enumerate(doc["pipelines"]):
        if p["name"] in names:
            raise ConfigError(f"duplicate pipeline name {p['name']!r}", f"/pipelines/{i}/name")
        names.add(p["name"])
        stages = tuple(_resolve_pass(s, f"/pipelines/{i}/stages/{j}") for j, s in enumerate(p["stages"]))
        pipelines.append((p["name"], stages))

    options = dict(DEFAULT_OPTIONS)
    options.update(doc.get("options", {}))

    search = None
    if "search" in doc:
        s = doc["search"]
        subs = tuple(_resolve_pass(x, f"/search/subroutines/{j}") for j, x in enumerate(s["subroutines"]))
        depth = s.get("max_depth", len(subs))
        if depth > len(subs):
            raise ConfigError(f"max_depth {depth} exceeds the {len(subs)} subroutines", "/search/max_depth")
        search = SearchSpec(subs, depth, s.get("objective", "gc_2q"), s.get("budget", 100_000))

    return ExperimentPlan(
        experiment_id=doc.get("experiment_id", "experiment"),
        master_seed=seed,
        targets=targets,
        hardware=hardware,
        pipelines=pipelines,
        options=options,
        search=search,
    )


def load_config(path: str | Path, master_seed: int | None = None) -> ExperimentPlan:
    """Load and resolve a JSON config; ``master_seed`` overrides the file's."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if master_seed is not None and isinstance(doc, dict):
        doc["master_seed"] = master_seed
    return plan_from_dict(doc, base_dir=path.parent)
