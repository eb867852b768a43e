"""Benchmarking harness for quantum circuit compilation pipelines."""

from .circuit import Circuit, Gate, GateKind, depth, gate, gate_count
from .hardware import HardwareSpec, k_regular_graph, preset, validate_connectivity
from .qasm import emit_qasm, load_qasm, parse_qasm
from .sim import check_equivalence, classical_fidelity, simulate

__version__ = "0.1.0"

__all__ = [
    "Circuit", "Gate", "GateKind", "HardwareSpec", "check_equivalence", "classical_fidelity", "depth",
    "emit_qasm", "gate", "gate_count", "k_regular_graph", "load_qasm", "parse_qasm", "preset",
    "simulate", "validate_connectivity",
]
