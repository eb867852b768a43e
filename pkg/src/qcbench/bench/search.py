"""Exhaustive search over ordered selections of optimisation passes, and the
single-pass ranking that is its depth-1 slice."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from ..circuit import Circuit
from ..hardware import HardwareSpec
from ..metrics import MetricsSnapshot, circuit_cost, compression_factor, cost_improvement, mean_std, snapshot
from ..passes.pipeline import PassSpec, run_pass
from ..passes.routing import RoutingResult
from ..sim import check_equivalence, logical_positions

MAX_SUBROUTINES = 12
TIE_BREAK = ("gc_total", "depth", "length")
REBASE_CX_RZ_RX = PassSpec("rebase", {"target": "cx_rz_rx"})
REBASE_HW = PassSpec("rebase", {"target": "hw"})


class SearchBudgetError(ValueError):
    pass


def search_space_size(s: int, max_depth: int) -> int:
    """Number of ordered selections of 1..max_depth distinct items out of s."""
    if not 1 <= s <= MAX_SUBROUTINES:
        raise ValueError(f"s must lie in 1..{MAX_SUBROUTINES}, got {s}")
    if not 1 <= max_depth <= s:
        raise ValueError(f"max_depth must lie in 1..{s}, got {max_depth}")
    return sum(math.perm(s, n) for n in range(1, max_depth + 1))


def enumerate_candidates(pool, max_depth: int):
    """Ordered selections of distinct pool indices, shortest first."""
    for n in range(1, max_depth + 1):
        yield from itertools.permutations(range(len(pool)), n)


def expand_candidate(pool, order) -> list[PassSpec]:
    """Each pass is preceded by a rebase to CX/Rz/Rx; a rebase to the
    hardware gate set closes the pipeline."""
    stages = []
    for i in order:
        stages += [REBASE_CX_RZ_RX, pool[i]]
    return stages + [REBASE_HW]


@dataclass
class Candidate:
    order: tuple[int, ...]
    names: tuple[str, ...]
    snapshot: MetricsSnapshot | None
    f_cl: float
    error: str = ""
    score: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.error

    def to_dict(self) -> dict:
        return {
            "pipeline": list(self.names),
            "score": list(self.score),
            "f_cl": self.f_cl,
            "error": self.error,
            "metrics": None if self.snapshot is None else self.snapshot.row(),
        }


@dataclass
class SearchResult:
    ranking: list[Candidate]
    size: int
    objective: str

    @property
    def best(self) -> Candidate | None:
        return next((c for c in self.ranking if c.ok), None)

    def depth1(self) -> list[Candidate]:
        return [c for c in self.ranking if len(c.order) == 1]


class _Evaluator:
    """Applies stage lists with memoised prefixes."""

    def __init__(self, circuit: Circuit, hw: HardwareSpec):
        self.hw = hw
        self.memo: dict[tuple, tuple[Circuit, tuple[int, ...]]] = {
            (): (circuit, tuple(range(circuit.n_qubits)))
        }

    def run(self, stages: list[PassSpec]):
        key: tuple = ()
        for s in stages:
            nxt = key + (s,)
            if nxt not in self.memo:
                c, pos = self.memo[key]
                res = run_pass(s, c, self.hw)
                if isinstance(res, RoutingResult):
                    where = logical_positions(res.p_out, c.n_qubits)
                    pos = tuple(where[p] for p in pos)
                    res = res.circuit
                self.memo[nxt] = (res, pos)
            key = nxt
        return self.memo[key]


def _score(snap: MetricsSnapshot, objective: str, length: int) -> tuple:
    return (snap.value(objective), snap.gc_total, snap.depth_all, length)


def composite_search(
    pool,
    circuit: Circuit,
    hw: HardwareSpec,
    max_depth: int | None = None,
    objective: str = "gc_2q",
    budget: int = 100_000,
    threshold: float = 1e-9,
) -> SearchResult:
    """Evaluate every ordered selection of distinct passes from ``pool``.

    Candidates are ranked by (objective, gc_total, depth, length); failing or
    non-equivalent candidates are kept at the end with their error."""
    pool = [PassSpec.parse(p) for p in pool]
    max_depth = len(pool) if max_depth is None else max_depth
    size = search_space_size(len(pool), max_depth)
    if size > budget:
        raise SearchBudgetError(f"search space of {size} candidates exceeds the budget of {budget}")
    ev = _Evaluator(circuit, hw)
    cands = []
    for order in enumerate_candidates(pool, max_depth):
        names = tuple(pool[i].label for i in order)
        try:
            out, pos = ev.run(expand_candidate(pool, order))
        except Exception as exc:  # a failing candidate is disqualified, not fatal
            cands.append(Candidate(order, names, None, math.nan, f"{type(exc).__name__}: {exc}"))
            continue
        rep = check_equivalence(circuit, out, threshold=threshold, positions=pos)
        snap = snapshot(out, hw)
        err = "" if rep.equivalent else f"equivalence check {rep.verdict.value}: {rep.reason or rep.f_cl}"
        cands.append(Candidate(order, names, snap, rep.f_cl, err, _score(snap, objective, len(order))))
    ranking = sorted(cands, key=lambda c: (not c.ok, c.score if c.ok else ()))
    return SearchResult(ranking, size, objective)


@dataclass
class RankRow:
    name: str
    cf_1q: float
    cf_2q: float
    cost_improvement: float
    gc_total: float
    depth: float

    def to_dict(self) -> dict:
        return dict(vars(self))


def rank_subroutines(pool, targets, hw: HardwareSpec, metric: str = "cf_2q") -> list[RankRow]:
    """Per-pass compression and cost improvement averaged over ``targets``
    (each pass wrapped as in :func:`composite_search`), best first.
    Infinite ratios are left out of the averages."""
    pool = [PassSpec.parse(p) for p in pool]
    circuits = [t[1] if isinstance(t, tuple) else t for t in targets]
    rows = []
    for i, p in enumerate(pool):
        acc = {"cf_1q": [], "cf_2q": [], "ci": [], "gc": [], "d": []}
        for c in circuits:
            out, _ = _Evaluator(c, hw).run(expand_candidate(pool, (i,)))
            a, b = snapshot(c, hw), snapshot(out, hw)
            acc["cf_1q"].append(compression_factor(a, b, "gc_1q"))
            acc["cf_2q"].append(compression_factor(a, b, "gc_2q"))
            acc["ci"].append(cost_improvement(circuit_cost(c, hw), circuit_cost(out, hw)))
            acc["gc"].append(b.gc_total)
            acc["d"].append(b.depth_all)
        mean = lambda v: mean_std(v)[0]  # noqa: E731
        rows.append(RankRow(p.label, mean(acc["cf_1q"]), mean(acc["cf_2q"]), mean(acc["ci"]),
                            mean(acc["gc"]), mean(acc["d"])))
    key = {"cf_1q": "cf_1q", "cf_2q": "cf_2q", "cost_improvement": "cost_improvement"}[metric]
    return sorted(rows, key=lambda r: (-getattr(r, key), r.gc_total, r.depth))
