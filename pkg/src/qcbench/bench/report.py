"""Report rendering from the JSON result document."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict

from ..metrics import format_ratio, mean_std
from .executor import CSV_COLUMNS


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format_ratio(v)
    return str(v)


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for cell in doc["cells"]:
        for row in cell["stages"]:
            w.writerow([_cell(row.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def to_json(doc: dict) -> str:
    return json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n"


def _num(x) -> float:
    if isinstance(x, str):
        return float(x)
    return math.nan if x is None else float(x)


def to_markdown(doc: dict) -> str:
    meta = doc["metadata"]
    lines = [
        f"# Experiment {meta['experiment_id']}",
        "",
        f"master seed {meta['master_seed']}, {meta['n_cells']} cells, {meta['n_failed']} failed, "
        f"natural-log cost, kernels: {meta['kernel_backend']}",
        "",
        "| hardware | pipeline | n | CF(2Q) | CF(1Q) | CF(depth) | cost improvement | equivalent |",
        "|---|---|---|---|---|---|---|---|",
    ]
    groups = defaultdict(list)
    for c in doc["cells"]:
        groups[(c["hardware"], c["pipeline"])].append(c)
    for (hw, pipe), cells in groups.items():
        ok = [c for c in cells if not c["error"]]

        def stat(key):
            m, s, n = mean_std(_num(c["summary"][key]) for c in ok)
            return "n/a" if n == 0 else f"{m:.3f} ± {s:.3f}"

        verdicts = [c.get("summary", {}).get("final_verdict") for c in cells]
        checked = [v for v in verdicts if v != "skipped"]
        eq = f"{checked.count('equivalent')}/{len(checked)}" if checked else "not checked"
        lines.append(
            f"| {hw} | {pipe} | {len(ok)}/{len(cells)} | {stat('cf_gc_2q')} | {stat('cf_gc_1q')} "
            f"| {stat('cf_depth')} | {stat('cost_improvement')} | {eq} |"
        )
    lines += ["", "Depth counts ASAP layers including terminal measurement layers; the cost charges unitary layers only."]
    failed = [c for c in doc["cells"] if c["error"]]
    if failed:
        lines += ["", "## Failed cells", ""]
        lines += [f"- cell {c['cell']} ({c['target_id']}, {c['hardware']}, {c['pipeline']}): {c['error']}" for c in failed]
    return "\n".join(lines) + "\n"
