"""Grid execution of (target, hardware, pipeline) cells and result collection."""

from __future__ import annotations

import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .._kernels import BACKEND
from ..metrics import (
    KIND_COLUMNS,
    LOG_BASE,
    compression_factor,
    cost_improvement,
    relative_change,
    snapshot,
)
from ..passes.pipeline import PassSpec, run_pipeline, verify_record
from ..qasm import emit_qasm
from .config import Cell, ExperimentPlan
from .search import TIE_BREAK

CSV_COLUMNS = (
    "experiment_id", "target_id", "hardware", "pipeline", "stage_index", "stage_name",
    "gc_total", "gc_1q", "gc_2q", *KIND_COLUMNS, "depth", "depth_2q", "cost", "runtime_s",
    "f_cl", "verdict",
)
TIMING_COLUMNS = ("runtime_s",)
SUMMARY_METRICS = ("gc_1q", "gc_2q", "gc_total", "depth", "depth_2q")


@dataclass
class CellResult:
    index: int
    target_id: str
    hardware: str
    pipeline: str
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    stage_qasm: list = field(default_factory=list)  # (stage file name, qasm text)
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    def to_dict(self) -> dict:
        return {
            "cell": self.index,
            "target_id": self.target_id,
            "hardware": self.hardware,
            "pipeline": self.pipeline,
            "stages": self.rows,
            "summary": self.summary,
            "error": self.error,
        }


def cell_seed(master_seed: int, cell_index: int) -> int:
    """Routing seed of one cell, derived from (master seed, cell index)."""
    return int(np.random.SeedSequence([master_seed, cell_index]).generate_state(1)[0])


def _seeded(stages, seed: int) -> list[PassSpec]:
    out = []
    for s in stages:
        if s.name == "route" and "seed" not in s.params:
            s = PassSpec("route", {**s.params, "seed": seed})
        out.append(s)
    return out


def _stage_file(index: int, name: str) -> str:
    return f"{index:02d}_{re.sub(r'[^A-Za-z0-9_.-]', '_', name)}.qasm"


def run_cell(cell: Cell, experiment_id: str, master_seed: int, options: dict) -> CellResult:
    res = CellResult(cell.index, cell.target_id, cell.hardware.name, cell.pipeline)
    hw = cell.hardware
    try:
        records = run_pipeline(cell.circuit, _seeded(cell.stages, cell_seed(master_seed, cell.index)), hw)
    except Exception as exc:
        res.error = f"{type(exc).__name__}: {exc}"
        return res
    verify = cell.circuit.n_qubits <= options["verify_max_qubits"]
    snaps = []
    for rec in records:
        snap = snapshot(rec.circuit, hw, rec.seconds)
        snaps.append(snap)
        if verify:
            rep = verify_record(cell.circuit, rec, options["threshold"])
            f_cl, verdict = rep.f_cl, rep.verdict.value
        else:
            f_cl, verdict = None, "skipped"
        row = {
            "experiment_id": experiment_id,
            "target_id": cell.target_id,
            "hardware": hw.name,
            "pipeline": cell.pipeline,
            "stage_index": rec.index,
            "stage_name": rec.name,
            **snap.row(),
            "f_cl": f_cl,
            "verdict": verdict,
        }
        res.rows.append(row)
        if options.get("dump_stages"):
            res.stage_qasm.append((_stage_file(rec.index, rec.name), emit_qasm(rec.circuit)))
    first, last = snaps[0], snaps[-1]
    res.summary = {
        **{f"cf_{m}": compression_factor(first, last, m) for m in SUMMARY_METRICS},
        "cost_improvement": cost_improvement(first.cost, last.cost),
        "cost_relative_change": relative_change(first.cost, last.cost),
        "final_verdict": res.rows[-1]["verdict"],
        "final_f_cl": res.rows[-1]["f_cl"],
    }
    route_overheads = [
        compression_factor(snaps[i], snaps[i - 1], "gc_2q")
        for i, rec in enumerate(records) if rec.routing is not None
    ]
    if route_overheads:
        res.summary["routing_overhead_2q"] = route_overheads
    verdicts = [r["verdict"] for r in res.rows]
    if verify and any(v != "equivalent" for v in verdicts):
        bad = next(r for r in res.rows if r["verdict"] != "equivalent")
        res.error = f"stage {bad['stage_index']} ({bad['stage_name']}) is {bad['verdict']} (f_cl={bad['f_cl']})"
    return res


def _run_cell_args(args):
    return run_cell(*args)


@dataclass
class ExperimentResult:
    experiment_id: str
    master_seed: int
    cells: list[CellResult]

    @property
    def failures(self) -> list[CellResult]:
        return [c for c in self.cells if not c.ok]

    def rows(self) -> list[dict]:
        return [r for c in self.cells for r in c.rows]

    def metadata(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "master_seed": self.master_seed,
            "log_base": LOG_BASE,
            "search_tie_break": list(TIE_BREAK),
            "kernel_backend": BACKEND,
            "n_cells": len(self.cells),
            "n_failed": len(self.failures),
        }

    def to_dict(self) -> dict:
        return {"metadata": self.metadata(), "cells": [c.to_dict() for c in self.cells]}


def run_experiment(plan: ExperimentPlan, jobs: int | None = None) -> ExperimentResult:
    """Run every cell; failures are recorded and the run continues."""
    jobs = plan.options.get("jobs", 1) if jobs is None else jobs
    args = [(cell, plan.experiment_id, plan.master_seed, plan.options) for cell in plan.cells()]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell_args, args))
    else:
        cells = [_run_cell_args(a) for a in args]
    cells.sort(key=lambda c: c.index)
    return ExperimentResult(plan.experiment_id, plan.master_seed, cells)


def write_outputs(result: ExperimentResult, out_dir: str | Path) -> dict[str, Path]:
    """CSV, JSON and Markdown reports plus any stage dumps."""
    from .report import to_csv, to_json, to_markdown

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / "results.csv",
        "json": out / "results.json",
        "md": out / "summary.md",
    }
    doc = result.to_dict()
    paths["csv"].write_text(to_csv(doc))
    paths["json"].write_text(to_json(doc))
    paths["md"].write_text(to_markdown(doc))
    for cell in result.cells:
        if not cell.stage_qasm:
            continue
        d = out / "stages" / f"cell{cell.index:04d}"
        d.mkdir(parents=True, exist_ok=True)
        for name, text in cell.stage_qasm:
            (d / name).write_text(text)
    return paths
