import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from qcbench.circuit import Circuit, GateKind, gate, gate_density
from qcbench.passes import remove_redundancies
from qcbench.targets import (
    RandomSpec,
    TargetError,
    full_randomize,
    haar_u3_angles,
    load_qasm_dir,
    random_circuit,
    resolve_target,
    samples_dir,
    shuffle_gates,
)

from conftest import circuits

CX_U3 = {"cx": 0.5, "u3": 0.5}


def test_density_within_three_sigma():
    n, p = 150, 0.5
    sigma = math.sqrt(p * (1 - p) / n)
    for seed in range(20):
        c = random_circuit(RandomSpec(2, n, CX_U3, seed=seed))
        assert abs(gate_density(c, "cx") - p) <= 3 * sigma
        assert abs(gate_density(c, "u3") - p) <= 3 * sigma


def test_all_cx():
    c = random_circuit(RandomSpec(3, 10, {"cx": 1.0}, seed=0))
    assert len(c) == 10 and all(g.kind is GateKind.CX for g in c.gates)
    assert all(len(set(g.qubits)) == 2 and max(g.qubits) < 3 for g in c.gates)


def test_same_seed_same_circuit():
    spec = RandomSpec(4, 50, {"cx": 0.3, "h": 0.3, "rz": 0.4}, seed=17)
    assert random_circuit(spec) == random_circuit(spec)
    assert random_circuit(spec) != random_circuit(RandomSpec(4, 50, spec.gate_probs, seed=18))


def test_spec_validation():
    with pytest.raises(TargetError):
        RandomSpec(2, 10, {"cx": 0.5, "u3": 0.4})
    with pytest.raises(TargetError):
        RandomSpec(1, 10, {"cx": 1.0})
    with pytest.raises(TargetError):
        RandomSpec(3, 10, {"ccx": 1.0})
    with pytest.raises(ValueError):
        RandomSpec(3, 10, {"foo": 1.0})


def test_haar_u3_angles_ks():
    rng = np.random.default_rng(0)
    draws = np.array([haar_u3_angles(rng) for _ in range(4000)])
    # Haar measure: cos(theta) uniform on [-1, 1], phi and lambda uniform on [0, 2 pi)
    assert stats.kstest(np.cos(draws[:, 0]), stats.uniform(-1, 2).cdf).pvalue > 0.01
    assert stats.kstest(draws[:, 1], stats.uniform(0, 2 * math.pi).cdf).pvalue > 0.01
    assert stats.kstest(draws[:, 2], stats.uniform(0, 2 * math.pi).cdf).pvalue > 0.01


def test_shuffle_single_gate():
    c = Circuit(2, [gate("cx", 0, 1)])
    assert shuffle_gates(c, 3) == c


@given(circuits(max_qubits=5), st.integers(0, 2**31))
def test_shuffle_and_randomize_keep_histogram(c, seed):
    assert shuffle_gates(c, seed).kind_counts() == c.kind_counts()
    assert full_randomize(c, seed).kind_counts() == c.kind_counts()
    assert sorted(g.params for g in full_randomize(c, seed).gates) == sorted(g.params for g in c.gates)


def test_shuffle_keeps_readout_tail():
    c = Circuit(2, [gate("h", 0), gate("cx", 0, 1), gate("measure", 0, cbit=0), gate("measure", 1, cbit=1)], 2)
    assert shuffle_gates(c, 1).gates[2:] == c.gates[2:]
    with pytest.raises(TargetError):
        shuffle_gates(Circuit(1, [gate("measure", 0, cbit=0), gate("h", 0)], 1), 0)


def test_shuffle_permutation_oracle():
    c = Circuit(2, [gate("h", 0), gate("cx", 0, 1), gate("h", 0)])
    # oracle: of the 3! orders, exactly those with the two H adjacent shrink
    perms = list(itertools.permutations(range(3)))
    adjacent = [p for p in perms if abs(p.index(0) - p.index(2)) == 1]
    assert len(adjacent) == 4 and len(perms) == 6
    # the two H gates are identical: 3 distinct circuits, 2 of which shrink
    shrinking = [p for p in perms if len(remove_redundancies(c.with_gates(c.gates[i] for i in p))) < 3]
    assert len(shrinking) == 4
    n = 1200
    outs = Counter(shuffle_gates(c, seed).gates for seed in range(n))
    assert len(outs) == 3
    target = (gate("h", 0), gate("h", 0), gate("cx", 0, 1))
    assert target in outs and len(remove_redundancies(c.with_gates(target))) == 1
    for g, cnt in outs.items():
        sigma = math.sqrt(n * (1 / 3) * (2 / 3))
        assert abs(cnt - n / 3) <= 3 * sigma


def test_full_randomize_one_qubit_is_shuffle():
    c = Circuit(1, [gate("h", 0), gate("rz", 0, params=[0.2]), gate("x", 0)])
    for seed in range(5):
        assert full_randomize(c, seed).gates in {tuple(p) for p in itertools.permutations(c.gates)}


def test_full_randomize_pair_frequencies():
    c = Circuit(4, [gate("cx", 0, 1)] * 1000)
    pairs = Counter(g.qubits for g in full_randomize(c, 11).gates)
    p = 1 / 12
    sigma = math.sqrt(1000 * p * (1 - p))
    assert len(pairs) == 12
    assert all(abs(n - 1000 * p) <= 3 * sigma for n in pairs.values())


def test_load_samples():
    named = load_qasm_dir(samples_dir())
    assert [n for n, _ in named] == sorted(p.stem for p in samples_dir().glob("*.qasm"))


def test_load_qasm_dir_errors(tmp_path):
    with pytest.raises(TargetError):
        load_qasm_dir(tmp_path / "missing")
    with pytest.raises(TargetError):
        load_qasm_dir(tmp_path)


def test_resolve_random_and_shuffled():
    spec = {"type": "random", "params": {"n_qubits": 3, "total_gates": 20, "gate_probs": CX_U3, "count": 3}}
    a = resolve_target(spec, key=(5, 0))
    assert [n for n, _ in a] == ["random_0", "random_1", "random_2"]
    assert a == resolve_target(spec, key=(5, 0))
    assert a != resolve_target(spec, key=(6, 0))
    sh = resolve_target({"type": "shuffled", "params": {"source": spec, "count": 2}}, key=(5, 0))
    assert len(sh) == 6 and sh[0][0] == "random_0~shuffled_0"
    with pytest.raises(TargetError):
        resolve_target({"type": "bogus"})
