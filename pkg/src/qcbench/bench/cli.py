"""Command line entry point: ``qcbench run|search|verify|rank|report``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..qasm import QasmError, load_qasm
from ..sim import check_equivalence
from .config import ConfigError, load_config
from .executor import run_experiment, write_outputs
from .report import to_csv, to_json, to_markdown
from .search import SearchBudgetError, composite_search, rank_subroutines

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _load_plan(args):
    plan = load_config(args.config, getattr(args, "seed", None))
    if getattr(args, "dump_stages", False):
        plan.options["dump_stages"] = True
    if getattr(args, "jobs", None) is not None:
        plan.options["jobs"] = args.jobs
    return plan


def cmd_run(args) -> int:
    plan = _load_plan(args)
    result = run_experiment(plan)
    paths = write_outputs(result, args.out)
    for cell in result.failures:
        print(f"cell {cell.index} failed: {cell.error}", file=sys.stderr)
    print(f"{len(result.cells)} cells, {len(result.failures)} failed; results in {paths['csv'].parent}")
    return EXIT_FAILED if result.failures else EXIT_OK


def _search_spec(plan):
    if plan.search is None:
        raise ConfigError("this command needs a 'search' section", "/search")
    return plan.search


def cmd_search(args) -> int:
    plan = _load_plan(args)
    spec = _search_spec(plan)
    report = []
    failed = False
    for tid, circ in plan.targets:
        for hw in plan.hardware:
            try:
                res = composite_search(spec.subroutines, circ, hw, spec.max_depth, spec.objective,
                                       spec.budget, plan.options["threshold"])
            except SearchBudgetError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            best = res.best
            failed |= best is None
            print(f"{tid} on {hw.name}: {res.size} candidates")
            for rank, cand in enumerate(res.ranking[: args.top], 1):
                tail = f"error: {cand.error}" if cand.error else f"score={cand.score}"
                print(f"  {rank:3d}. {' -> '.join(cand.names)}  {tail}")
            report.append({
                "target_id": tid,
                "hardware": hw.name,
                "size": res.size,
                "objective": res.objective,
                "ranking": [c.to_dict() for c in res.ranking],
            })
    if args.out:
        Path(args.out).write_text(to_json({"searches": report}))
    return EXIT_FAILED if failed else EXIT_OK


def cmd_rank(args) -> int:
    plan = _load_plan(args)
    spec = _search_spec(plan)
    for hw in plan.hardware:
        rows = rank_subroutines(spec.subroutines, plan.targets, hw, metric=args.metric)
        print(f"# {hw.name}")
        print(f"{'subroutine':28s} {'CF(2Q)':>9s} {'CF(1Q)':>9s} {'cost impr.':>10s}")
        for r in rows:
            print(f"{r.name:28s} {r.cf_2q:9.3f} {r.cf_1q:9.3f} {r.cost_improvement:10.3f}")
    return EXIT_OK


def _read_perm(path: str) -> list[int]:
    text = Path(path).read_text().strip()
    if text.startswith("["):
        return [int(x) for x in json.loads(text)]
    return [int(x) for x in text.split()]


def cmd_verify(args) -> int:
    try:
        a = load_qasm(args.a)
        b = load_qasm(args.b)
        perm = _read_perm(args.perm) if args.perm else None
    except (QasmError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep = check_equivalence(a, b, threshold=args.threshold, positions=perm)
    print(f"f_cl={rep.f_cl!r} |1-f_cl|={rep.error:.3e} verdict={rep.verdict.value}"
          + (f" ({rep.reason})" if rep.reason else ""))
    return EXIT_OK if rep.equivalent else EXIT_FAILED


def cmd_report(args) -> int:
    try:
        doc = json.loads(Path(args.results).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = to_markdown(doc) if args.format == "md" else to_csv(doc)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcbench", description="Quantum compilation pipeline benchmarks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every (target, hardware, pipeline) cell of a config")
    p.add_argument("config")
    p.add_argument("--out", default="results")
    p.add_argument("--dump-stages", action="store_true")
    p.add_argument("--jobs", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("search", help="brute-force search over pass orderings")
    p.add_argument("config")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="classical-fidelity equivalence of two QASM files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--perm", help="file listing, per qubit of a, the qubit of b holding it")
    p.add_argument("--threshold", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rank", help="rank single subroutines by compression")
    p.add_argument("config")
    p.add_argument("--metric", choices=("cf_2q", "cf_1q", "cost_improvement"), default="cf_2q")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("report", help="re-render a results.json")
    p.add_argument("results")
    p.add_argument("--format", choices=("md", "csv"), default="md")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
