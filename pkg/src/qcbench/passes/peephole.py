"""Two-qubit block resynthesis via the KAK decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..circuit import ONE_QUBIT_KINDS, TWO_QUBIT_KINDS, Circuit, Gate, GateKind
from ..synthesis import (
    DecompositionError,
    circuit_unitary,
    kak_decompose,
    num_cx_required,
    synthesize_2q,
    unitary_fidelity,
)
from .routing import fix_polarity

BLOCK_FIDELITY_TOL = 1e-9
_CACHE_SIZE = 4096
_synth_cache: dict[bytes, tuple[int, Circuit | None]] = {}


def _block_key(u: np.ndarray) -> bytes:
    """Phase-normalised, rounded fingerprint of a block unitary."""
    i = int(np.argmax(np.abs(u)))
    v = u * (abs(u.flat[i]) / u.flat[i])
    return np.round(v, 11).tobytes()


def _synthesize(u: np.ndarray) -> tuple[int, Circuit | None]:
    """Minimal CX count and [CX, U3] circuit for ``u`` (None on failure),
    memoised because search re-optimises near-identical circuits."""
    key = _block_key(u)
    hit = _synth_cache.get(key)
    if hit is not None:
        return hit
    try:
        kak = kak_decompose(u)
        m = num_cx_required(kak.weyl)
        res = (m, synthesize_2q(kak))
    except DecompositionError:
        res = (3, None)
    if len(_synth_cache) >= _CACHE_SIZE:
        _synth_cache.pop(next(iter(_synth_cache)))
    _synth_cache[key] = res
    return res


@dataclass
class _Block:
    pair: tuple[int, int]
    indices: list[int] = field(default_factory=list)


def collect_2q_blocks(c: Circuit) -> list[_Block]:
    """Maximal runs of gates confined to one qubit pair, in list order.

    A block opens at a two-qubit gate, absorbs the single-qubit gates pending
    on its qubits, and closes as soon as another gate touches one of them."""
    blocks: list[_Block] = []
    open_on: dict[int, _Block] = {}
    pending: dict[int, list[int]] = {}

    def close(b: _Block):
        for q in b.pair:
            if open_on.get(q) is b:
                del open_on[q]

    for i, g in enumerate(c.gates):
        if g.kind in ONE_QUBIT_KINDS:
            q = g.qubits[0]
            if q in open_on:
                open_on[q].indices.append(i)
            else:
                pending.setdefault(q, []).append(i)
        elif g.kind in TWO_QUBIT_KINDS:
            a, b = g.qubits
            blk = open_on.get(a)
            if blk is not None and blk is open_on.get(b):
                blk.indices.append(i)
                continue
            for q in (a, b):
                if q in open_on:
                    close(open_on[q])
            idx = sorted(pending.pop(a, []) + pending.pop(b, []))
            blk = _Block((a, b), idx + [i])
            blocks.append(blk)
            open_on[a] = open_on[b] = blk
        else:
            for q in g.qubits:
                if q in open_on:
                    close(open_on[q])
                pending.pop(q, None)
    return blocks


def _cost(gates) -> tuple[int, int]:
    n2 = sum(3 if g.kind is GateKind.SWAP else 1 for g in gates if g.kind in TWO_QUBIT_KINDS)
    return n2, len(gates)


def peephole_kak(c: Circuit, hw=None) -> Circuit:
    """Resynthesise every two-qubit block with the minimal number of CX gates.

    A replacement is kept only if it lowers (two-qubit count, total count)
    lexicographically and reproduces the block unitary to 1e-9."""
    coupling = getattr(hw, "coupling", None)
    replace: dict[int, list[Gate]] = {}
    drop: set[int] = set()
    for blk in collect_2q_blocks(c):
        old = [c.gates[i] for i in blk.indices]
        local = {blk.pair[0]: 0, blk.pair[1]: 1}
        sub = Circuit(2, [g.remap(local) for g in old])
        u = circuit_unitary(sub)
        old_cost = _cost(old)
        m, new_local = _synthesize(u)
        # a synthesised block has at least m gates
        if new_local is None or (m, m) >= old_cost:
            continue
        new = [g.remap(blk.pair) for g in new_local.gates]
        new = fix_polarity(new, coupling)
        if _cost(new) >= old_cost:
            continue
        check = circuit_unitary(Circuit(2, [g.remap(local) for g in new]))
        if unitary_fidelity(u, check) <= 1 - BLOCK_FIDELITY_TOL:
            continue
        drop.update(blk.indices)
        replace[blk.indices[-1]] = new
    out: list[Gate] = []
    for i, g in enumerate(c.gates):
        if i in replace:
            out.extend(replace[i])
        elif i not in drop:
            out.append(g)
    return c.with_gates(out)


def block_unitaries(c: Circuit) -> list[np.ndarray]:
    """4x4 unitaries of the blocks found by :func:`collect_2q_blocks`."""
    res = []
    for blk in collect_2q_blocks(c):
        local = {blk.pair[0]: 0, blk.pair[1]: 1}
        res.append(circuit_unitary(Circuit(2, [c.gates[i].remap(local) for i in blk.indices])))
    return res
