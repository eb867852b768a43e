"""Numba vs numpy timing of the hot kernels.

Run ``python benchmarks/bench_kernels.py``.  Both implementations are timed
in-process on identical inputs; results are checked to agree.  End-to-end
statevector simulation is also timed in two subprocesses, one with
``QCBENCH_DISABLE_NUMBA=1``, so the env-flag path is exercised as deployed.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qcbench import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def gate_sweep(k, n, batch, n_gates, rng):
    """Apply ``n_gates`` random k-qubit unitaries to a (2**n, batch) state."""
    ms = [np.linalg.qr(rng.standard_normal((1 << k, 1 << k)) + 1j * rng.standard_normal((1 << k, 1 << k)))[0]
          for _ in range(n_gates)]
    qs = [tuple(int(q) for q in rng.choice(n, size=k, replace=False)) for _ in range(n_gates)]
    state0 = np.zeros((1 << n, batch), dtype=complex)
    state0[0] = 1.0

    def run(kern):
        state = state0.copy()
        apply = getattr(kern, f"apply_{k}q")
        for m, q in zip(ms, qs):
            apply(state, m, *q)
        return state

    return run


def swap_sweep(n, n_front, n_ext, rng):
    dist = rng.integers(0, n, size=(n, n)).astype(float)
    l2p = rng.permutation(n)
    front = rng.integers(0, n, size=(n_front, 2))
    ext = rng.integers(0, n, size=(n_ext, 2))
    cands = rng.integers(0, n, size=(3 * n, 2))

    def run(kern):
        out = None
        for _ in range(200):
            out = kern.swap_scores(dist, l2p, front, ext, cands, 0.5)
        return out

    return run


SIM_SNIPPET = """
import time
from qcbench import _kernels
from qcbench.sim import simulate
from qcbench.targets import RandomSpec, random_circuit
c = random_circuit(RandomSpec({n}, {gates}, {{"cx": 0.5, "u3": 0.5}}, seed=1))
simulate(c)
t0 = time.perf_counter()
for _ in range({repeat}):
    simulate(c)
print(_kernels.BACKEND, (time.perf_counter() - t0) / {repeat})
"""


def sim_subprocess(disable, n, gates, repeat):
    env = dict(os.environ)
    if disable:
        env["QCBENCH_DISABLE_NUMBA"] = "1"
    else:
        env.pop("QCBENCH_DISABLE_NUMBA", None)
    code = SIM_SNIPPET.format(n=n, gates=gates, repeat=repeat)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, secs = out.stdout.split()
    return backend, float(secs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _kernels.numba_kernels is None:
        print("numba is not importable; nothing to compare")
        return 1
    rng = np.random.default_rng(args.seed)
    cases = [
        ("apply_1q n=12 batch=1 x200", gate_sweep(1, 12, 1, 200, rng)),
        ("apply_2q n=12 batch=1 x200", gate_sweep(2, 12, 1, 200, rng)),
        ("apply_3q n=10 batch=1 x100", gate_sweep(3, 10, 1, 100, rng)),
        ("apply_2q n=6 batch=64 x200 (unitary build)", gate_sweep(2, 6, 64, 200, rng)),
        ("apply_1q n=4 batch=1 x2000 (small states)", gate_sweep(1, 4, 1, 2000, rng)),
        ("swap_scores n=16 front=8 ext=20 x200", swap_sweep(16, 8, 20, rng)),
    ]
    print(f"{'kernel':46s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, run in cases:
        ref = run(_kernels.numpy_kernels)
        got = run(_kernels.numba_kernels)  # also triggers compilation
        assert np.allclose(ref, got), name
        t_np = best_of(lambda: run(_kernels.numpy_kernels), args.repeat)
        t_nb = best_of(lambda: run(_kernels.numba_kernels), args.repeat)
        print(f"{name:46s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:7.2f}x")
    print()
    print("end-to-end simulate(), 12 qubits, 300 gates, via QCBENCH_DISABLE_NUMBA:")
    for disable in (True, False):
        backend, secs = sim_subprocess(disable, 12, 300, args.repeat)
        print(f"  backend={backend:6s} {1e3 * secs:9.2f} ms per circuit")
    return 0


if __name__ == "__main__":
    sys.exit(main())
