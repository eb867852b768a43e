"""Scalar circuit metrics: gate counts, depths, the fidelity-motivated cost
and the ratios between pipeline stages.

Logarithms are natural.  Ratios with a zero denominator are ``inf`` (or 1.0
when the numerator is zero as well) and are skipped by :func:`mean_std`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    ONE_QUBIT_KINDS,
    THREE_QUBIT_KINDS,
    TWO_QUBIT_KINDS,
    Circuit,
    GateKind,
    depth,
    gate_count,
)
from .hardware import HardwareSpec

UNITARY_KINDS = tuple(k for k in GateKind if k.is_unitary)
KIND_COLUMNS = tuple(f"gc_{k.value}" for k in UNITARY_KINDS)
SCALAR_METRICS = ("gc_total", "gc_1q", "gc_2q", "gc_3q", "depth", "depth_2q", "cost", "runtime_s")
LOG_BASE = "e"


def circuit_cost(c: Circuit, hw: HardwareSpec) -> float:
    """-D ln K - sum ln F1q - sum ln F2q over unitary gates; D counts unitary
    layers.  Three-qubit gates are charged one two-qubit fidelity."""
    d = depth(c, "unitary")
    n1 = gate_count(c, "1q")
    n2 = gate_count(c, "2q") + gate_count(c, "3q")
    return -d * math.log(hw.depth_penalty_k) - n1 * math.log(hw.f1q) - n2 * math.log(hw.f2q)


@dataclass(frozen=True)
class MetricsSnapshot:
    counts: dict = field(default_factory=dict)  # gate name -> count, unitary kinds only
    gc_1q: int = 0
    gc_2q: int = 0
    gc_3q: int = 0
    gc_total: int = 0
    depth_all: int = 0
    depth_2q: int = 0
    cost: float = 0.0
    runtime_s: float = 0.0

    def value(self, metric: str) -> float:
        if metric in ("depth", "depth_all"):
            return self.depth_all
        if metric in ("gc_total", "gc_1q", "gc_2q", "gc_3q", "depth_2q", "cost", "runtime_s"):
            return getattr(self, metric)
        if metric.startswith("gc_"):
            name = metric[3:]
            if name not in {k.value for k in GateKind}:
                raise KeyError(f"unknown metric {metric!r}")
            return self.counts.get(name, 0)
        raise KeyError(f"unknown metric {metric!r}")

    def row(self) -> dict:
        """Flat record in the fixed CSV column order."""
        out = {
            "gc_total": self.gc_total,
            "gc_1q": self.gc_1q,
            "gc_2q": self.gc_2q,
        }
        for k, col in zip(UNITARY_KINDS, KIND_COLUMNS):
            out[col] = self.counts.get(k.value, 0)
        out["depth"] = self.depth_all
        out["depth_2q"] = self.depth_2q
        out["cost"] = self.cost
        out["runtime_s"] = self.runtime_s
        return out


def snapshot(c: Circuit, hw: HardwareSpec | None = None, runtime_s: float = 0.0) -> MetricsSnapshot:
    counts = {k.value: n for k, n in sorted(c.kind_counts().items(), key=lambda kv: kv[0].value) if k.is_unitary}
    return MetricsSnapshot(
        counts=counts,
        gc_1q=sum(n for k, n in c.kind_counts().items() if k in ONE_QUBIT_KINDS),
        gc_2q=sum(n for k, n in c.kind_counts().items() if k in TWO_QUBIT_KINDS),
        gc_3q=sum(n for k, n in c.kind_counts().items() if k in THREE_QUBIT_KINDS),
        gc_total=gate_count(c, "all"),
        depth_all=depth(c, "all"),
        depth_2q=depth(c, "2q"),
        cost=circuit_cost(c, hw) if hw is not None else 0.0,
        runtime_s=runtime_s,
    )


def ratio(num: float, den: float) -> float:
    if den == 0:
        return 1.0 if num == 0 else math.inf
    return num / den


def compression_factor(a: MetricsSnapshot, b: MetricsSnapshot, metric: str = "gc_2q") -> float:
    """metric(a) / metric(b); above 1 when ``b`` is smaller."""
    return ratio(a.value(metric), b.value(metric))


def overhead(a: MetricsSnapshot, b: MetricsSnapshot, metric: str = "gc_2q") -> float:
    """metric(b) / metric(a), the reciprocal orientation used for routing."""
    return ratio(b.value(metric), a.value(metric))


def cost_improvement(in_cost: float, out_cost: float) -> float:
    return ratio(in_cost, out_cost)


def relative_change(in_value: float, out_value: float) -> float:
    """(out - in) / in."""
    if in_value == 0:
        return 0.0 if out_value == 0 else math.inf
    return (out_value - in_value) / in_value


def mean_std(values) -> tuple[float, float, int]:
    """Arithmetic mean and sample standard deviation of the finite values,
    plus how many were used."""
    v = np.array([x for x in values if math.isfinite(x)], dtype=float)
    if v.size == 0:
        return math.nan, math.nan, 0
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return float(v.mean()), std, int(v.size)


def format_ratio(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))
