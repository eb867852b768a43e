import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcbench.bench.cli import main
from qcbench.bench.config import ConfigError, load_config, plan_from_dict
from qcbench.bench.executor import CSV_COLUMNS, cell_seed, run_experiment
from qcbench.bench.report import to_csv, to_markdown
from qcbench.bench.search import (
    SearchBudgetError,
    composite_search,
    enumerate_candidates,
    rank_subroutines,
    search_space_size,
)
from qcbench.circuit import Circuit, gate
from qcbench.hardware import preset
from qcbench.qasm import load_qasm, save_qasm
from qcbench.targets import samples_dir

HW = preset("mock-ibm-all2all-10q")
RANDOM = {"type": "random", "params": {"n_qubits": 2, "total_gates": 30, "gate_probs": {"cx": 0.5, "u3": 0.5}}}
MINIMAL = {"targets": [RANDOM], "hardware": ["mock-ibm-all2all-10q"],
           "pipelines": [{"name": "p", "stages": ["preprocess", "peephole_kak", "rebase"]}]}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


# -- config ----------------------------------------------------------------------

def test_minimal_config_one_cell():
    plan = plan_from_dict(MINIMAL)
    assert len(plan.cells()) == 1 and plan.master_seed == 0


def test_grid_product():
    doc = dict(MINIMAL, targets=[RANDOM, RANDOM],
               hardware=["mock-ibm-all2all-10q", "ionq-32q", {"preset": "rigetti-aspen-16q", "edges": {"k_regular": 3}}],
               pipelines=[{"name": "a", "stages": []}, {"name": "b", "stages": ["merge_1q"]}])
    cells = plan_from_dict(doc).cells()
    assert len(cells) == 12
    assert [c.index for c in cells] == list(range(12))
    assert cells[0].target_id == "t0/random_0" and cells[-1].target_id == "t1/random_0"


def test_unknown_pass_names_pass_and_lists_supported():
    doc = dict(MINIMAL, pipelines=[{"name": "p", "stages": ["full_reduce"]}])
    with pytest.raises(ConfigError) as exc:
        plan_from_dict(doc)
    assert "full_reduce" in str(exc.value) and "peephole_kak" in str(exc.value)
    assert exc.value.pointer == "/pipelines/0/stages/0"


@pytest.mark.parametrize(
    "patch, pointer",
    [
        ({"hardware": ["no-such-device"]}, "/hardware/0"),
        ({"targets": [{"type": "random", "params": {"n_qubits": 2, "total_gates": 3, "gate_probs": {"cx": 0.7}}}]},
         "/targets/0"),
        ({"options": {"threshold": -1}}, "/options/threshold"),
        ({"extra": 1}, ""),
        ({"pipelines": [{"name": "p", "stages": [{"name": "route", "params": {"lookahead": 0}}]}]},
         "/pipelines/0/stages/0"),
    ],
)
def test_config_errors_point_into_document(patch, pointer):
    with pytest.raises(ConfigError) as exc:
        plan_from_dict({**MINIMAL, **patch})
    assert exc.value.pointer == pointer


def test_hardware_overrides(tmp_path):
    (tmp_path / "edges.txt").write_text("".join(f"{i} {(i + 1) % 16}\n" for i in range(16)))
    doc = dict(MINIMAL, hardware=[
        {"preset": "ibm-rueschlikon-16q", "edges": {"k_regular": 4, "seed": 2}},
        {"preset": "mock-ibm-all2all-10q", "edges": [[i, i + 1] for i in range(9)], "name": "line10"},
        {"preset": "rigetti-aspen-16q", "edges": {"file": "edges.txt"}},
        {"name": "tiny", "n_qubits": 4, "gateset": "cx_u3", "edges": [[0, 1], [1, 2], [2, 3]],
         "f1q": 0.999, "f2q": 0.99, "k": 0.99},
    ])
    hws = load_config(write(tmp_path, doc)).hardware
    assert hws[0].coupling.degrees() == [4] * 16
    assert hws[1].name == "line10" and len(hws[1].coupling.edges) == 9
    assert hws[2].coupling.degrees() == [2] * 16 and hws[2].gate_set.name == "cz_rz_rx90"
    assert hws[3].n_qubits == 4


def test_load_config_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{\n  \"targets\": [,]\n}")
    with pytest.raises(ConfigError, match="line 2"):
        load_config(p)


def test_seed_override(tmp_path):
    assert load_config(write(tmp_path, MINIMAL), master_seed=42).master_seed == 42


def test_cell_seed_depends_on_master_and_index():
    assert cell_seed(1, 0) == cell_seed(1, 0)
    assert len({cell_seed(1, 0), cell_seed(1, 1), cell_seed(2, 0)}) == 3


# -- executor and reports ---------------------------------------------------------

def test_experiment_kak_rows():
    doc = dict(MINIMAL, targets=[dict(RANDOM, params=dict(RANDOM["params"], count=4, total_gates=150))],
               pipelines=[{"name": "kak", "stages": ["preprocess", "peephole_kak", "merge_1q",
                                                     {"name": "rebase", "params": {"target": "cx_u3"}}]}])
    result = run_experiment(plan_from_dict(doc))
    assert not result.failures
    for cell in result.cells:
        last = cell.rows[-1]
        assert last["gc_cx"] == 3 and last["gc_u3"] <= 8 and last["verdict"] == "equivalent"
        assert cell.summary["final_verdict"] == "equivalent"
    assert list(result.rows()[0]) == list(CSV_COLUMNS)


def test_failed_cell_does_not_stop_run():
    line = {"name": "line3", "n_qubits": 3, "gateset": "cx_u3", "edges": [[0, 1], [1, 2]],
            "f1q": 0.999, "f2q": 0.99, "k": 0.995}
    doc = dict(MINIMAL, targets=[RANDOM, dict(RANDOM, params=dict(RANDOM["params"], n_qubits=4))],
               hardware=[line], pipelines=[{"name": "r", "stages": ["route"]}])
    result = run_experiment(plan_from_dict(doc))
    assert [c.ok for c in result.cells] == [True, False]
    assert "route" in result.failures[0].error
    md = to_markdown(result.to_dict())
    assert "Failed cells" in md and "1/2" in md


def test_csv_renders_inf():
    doc = {"cells": [{"stages": [{c: (math.inf if c == "cost" else 1) for c in CSV_COLUMNS}]}]}
    assert to_csv(doc).splitlines()[1].split(",")[CSV_COLUMNS.index("cost")] == "inf"


# -- search -------------------------------------------------------------------------

def test_search_space_examples():
    assert search_space_size(5, 5) == 325
    assert search_space_size(1, 1) == 1
    assert search_space_size(2, 2) == 4
    assert list(enumerate_candidates("AB", 2)) == [(0,), (1,), (0, 1), (1, 0)]
    with pytest.raises(ValueError):
        search_space_size(13, 1)
    with pytest.raises(ValueError):
        search_space_size(3, 4)


@given(st.integers(1, 6), st.data())
def test_enumeration_matches_size(s, data):
    d = data.draw(st.integers(1, s))
    cands = list(enumerate_candidates(list(range(s)), d))
    assert len(cands) == len(set(cands)) == search_space_size(s, d)
    assert all(len(set(c)) == len(c) for c in cands)


def test_search_budget():
    with pytest.raises(SearchBudgetError):
        composite_search(["merge_1q", "remove_redundancies"], Circuit(1), HW, budget=3)


def test_search_trivial_pool():
    c = Circuit(1, [gate("h", 0), gate("h", 0)])
    res = composite_search(["remove_redundancies"], c, HW)
    assert res.size == 1 and res.best.names == ("remove_redundancies",)
    assert res.best.snapshot.gc_total == 0


def test_search_order_matters():
    c = load_qasm(samples_dir() / "order_sensitive.qasm")
    res = composite_search(["commutative_cancellation", "peephole_kak"], c, HW)
    scores = {cand.names: cand.score for cand in res.ranking}
    fwd = scores[("commutative_cancellation", "peephole_kak")]
    rev = scores[("peephole_kak", "commutative_cancellation")]
    assert fwd != rev and fwd[0] == 2
    best_single = min(cand.score[0] for cand in res.depth1())
    assert res.best.score[0] < best_single


def test_rank_equals_depth1_slice():
    c = load_qasm(samples_dir() / "toffoli_chain.qasm")
    pool = ["remove_redundancies", "merge_1q", "commutative_cancellation", "peephole_kak"]
    rows = {r.name: r for r in rank_subroutines(pool, [c], HW)}
    res = composite_search(pool, c, HW, max_depth=1)
    for cand in res.depth1():
        assert rows[cand.names[0]].gc_total == cand.snapshot.gc_total
        assert rows[cand.names[0]].depth == cand.snapshot.depth_all


def test_rank_no_improvement_keeps_input_order():
    c = Circuit(2, [gate("cx", 0, 1)])
    pool = ["remove_redundancies", "merge_1q", "drop_negligible"]
    rows = rank_subroutines(pool, [c], HW)
    assert [r.name for r in rows] == pool
    assert all(r.cf_2q == 1.0 for r in rows)


# -- CLI --------------------------------------------------------------------------------

def test_cli_run_and_report(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out), "--dump-stages"]) == 0
    assert (out / "results.csv").read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    stages = sorted(p.name for p in (out / "stages" / "cell0000").iterdir())
    assert stages == ["00_target.qasm", "01_preprocess.qasm", "02_peephole_kak.qasm", "03_rebase_hw.qasm"]
    capsys.readouterr()
    assert main(["report", str(out / "results.json")]) == 0
    assert "| mock-ibm-all2all-10q | p | 1/1 |" in capsys.readouterr().out
    assert main(["report", str(out / "results.json"), "--format", "csv"]) == 0
    assert capsys.readouterr().out == (out / "results.csv").read_text()


def test_cli_config_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, dict(MINIMAL, pipelines=[{"name": "p", "stages": ["full_reduce"]}]))
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "full_reduce" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.json")]) == 2


def test_cli_failed_cells_exit_one(tmp_path):
    line = {"name": "line3", "n_qubits": 3, "gateset": "cx_u3", "edges": [[0, 1], [1, 2]],
            "f1q": 0.999, "f2q": 0.99, "k": 0.995}
    doc = dict(MINIMAL, targets=[dict(RANDOM, params=dict(RANDOM["params"], n_qubits=4))],
               hardware=[line], pipelines=[{"name": "r", "stages": ["route"]}])
    assert main(["run", str(write(tmp_path, doc)), "--out", str(tmp_path / "o")]) == 1


def test_cli_verify(tmp_path, capsys):
    a = Circuit(2, [gate("ry", 0, params=[0.4]), gate("cx", 0, 1), gate("x", 0)])
    moved = Circuit(2, [g.remap([1, 0]) for g in a.gates])
    save_qasm(a, tmp_path / "a.qasm")
    save_qasm(moved, tmp_path / "b.qasm")
    (tmp_path / "perm.txt").write_text("1 0\n")
    assert main(["verify", str(tmp_path / "a.qasm"), str(tmp_path / "a.qasm")]) == 0
    assert "verdict=equivalent" in capsys.readouterr().out
    assert main(["verify", str(tmp_path / "a.qasm"), str(tmp_path / "b.qasm"), "--perm", str(tmp_path / "perm.txt")]) == 0
    assert main(["verify", str(tmp_path / "a.qasm"), str(tmp_path / "b.qasm")]) == 1
    (tmp_path / "bad.qasm").write_text("OPENQASM 2.0; qreg q[1]; bogus q[0];")
    assert main(["verify", str(tmp_path / "a.qasm"), str(tmp_path / "bad.qasm")]) == 2


def test_cli_search_and_rank(tmp_path, capsys):
    doc = dict(MINIMAL, targets=[{"type": "qasm_dir", "params": {"path": "@samples"}}],
               search={"subroutines": ["commutative_cancellation", "peephole_kak"]})
    cfg = write(tmp_path, doc)
    assert main(["search", str(cfg), "--top", "2", "--out", str(tmp_path / "s.json")]) == 0
    text = capsys.readouterr().out
    assert "order_sensitive on mock-ibm-all2all-10q: 4 candidates" in text
    searches = json.loads((tmp_path / "s.json").read_text())["searches"]
    assert len(searches) == len(list(samples_dir().glob("*.qasm")))
    assert main(["rank", str(cfg), "--metric", "cost_improvement"]) == 0
    assert "peephole_kak" in capsys.readouterr().out
    assert main(["search", str(write(tmp_path, MINIMAL, "nosearch.json"))]) == 2
