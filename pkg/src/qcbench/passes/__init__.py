"""Circuit optimisation, rebase and routing passes."""

from .peephole import block_unitaries, collect_2q_blocks, peephole_kak
from .pipeline import (
    PASS_NAMES,
    PASSES,
    PassError,
    PassSpec,
    PipelineError,
    StageRecord,
    preprocess,
    run_pass,
    run_pipeline,
    verify_record,
)
from .rebase import RebaseError, emit_1q, ionq_cx, rebase, unroll_3q, unroll_ccx
from .routing import STRATEGIES, RoutingError, RoutingResult, fix_polarity, route
from .simplify import (
    commutative_cancellation,
    commute_rz_forward,
    drop_negligible,
    gates_commute,
    merge_1q,
    remove_redundancies,
)

__all__ = [
    "PASS_NAMES", "PASSES", "STRATEGIES", "PassError", "PassSpec", "PipelineError",
    "RebaseError", "RoutingError", "RoutingResult", "StageRecord", "block_unitaries",
    "collect_2q_blocks", "commutative_cancellation", "commute_rz_forward", "drop_negligible",
    "emit_1q", "fix_polarity", "gates_commute", "ionq_cx", "merge_1q", "peephole_kak",
    "preprocess", "rebase", "remove_redundancies", "route", "run_pass", "run_pipeline",
    "unroll_3q", "unroll_ccx", "verify_record",
]
