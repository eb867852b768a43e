"""Hot numeric kernels: gate application on (batched) statevectors and the
SWAP scoring loop of the router.

Two implementations with identical signatures live here.  The numba one is
used when numba imports and ``QCBENCH_DISABLE_NUMBA`` is unset; otherwise the
pure-numpy one.  ``state`` arrays are complex128 of shape ``(2**n, batch)`` and
are updated in place.
"""

from __future__ import annotations

import os
import types

import numpy as np

# -- numpy path -------------------------------------------------------------


def _np_apply_1q(state, m, q):
    dim, batch = state.shape
    view = state.reshape(dim >> (q + 1), 2, 1 << q, batch)
    view[...] = np.einsum("ab,ibjk->iajk", m, view)


def _np_apply_2q(state, m, q0, q1):
    dim, batch = state.shape
    n = dim.bit_length() - 1
    t = state.reshape((2,) * n + (batch,))
    a0, a1 = n - 1 - q0, n - 1 - q1
    mt = m.reshape(2, 2, 2, 2)  # [out1, out0, in1, in0]
    res = np.tensordot(mt, t, axes=([2, 3], [a1, a0]))
    res = np.moveaxis(res, [0, 1], [a1, a0])
    state[...] = res.reshape(dim, batch)


def _np_apply_3q(state, m, q0, q1, q2):
    dim, batch = state.shape
    n = dim.bit_length() - 1
    t = state.reshape((2,) * n + (batch,))
    a0, a1, a2 = n - 1 - q0, n - 1 - q1, n - 1 - q2
    mt = m.reshape(2, 2, 2, 2, 2, 2)
    res = np.tensordot(mt, t, axes=([3, 4, 5], [a2, a1, a0]))
    res = np.moveaxis(res, [0, 1, 2], [a2, a1, a0])
    state[...] = res.reshape(dim, batch)


def _np_swap_scores(dist, l2p, front, ext, cands, ext_weight):
    costs = np.empty(len(cands))
    for i in range(len(cands)):
        a, b = cands[i]
        mapping = l2p.copy()
        # swap the logical occupants of physical a and b
        la = np.nonzero(l2p == a)[0]
        lb = np.nonzero(l2p == b)[0]
        mapping[la] = b
        mapping[lb] = a
        c = dist[mapping[front[:, 0]], mapping[front[:, 1]]].sum() if len(front) else 0.0
        if len(ext):
            c += ext_weight * dist[mapping[ext[:, 0]], mapping[ext[:, 1]]].sum()
        costs[i] = c
    return costs


numpy_kernels = types.SimpleNamespace(
    name="numpy",
    apply_1q=_np_apply_1q,
    apply_2q=_np_apply_2q,
    apply_3q=_np_apply_3q,
    swap_scores=_np_swap_scores,
)

# -- numba path -------------------------------------------------------------

numba_kernels = None
try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

if njit is not None:

    @njit(cache=True)
    def _nb_apply_1q(state, m, q):
        dim, batch = state.shape
        bit = 1 << q
        m00, m01, m10, m11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        for i in range(dim):
            if i & bit:
                continue
            j = i | bit
            for k in range(batch):
                a = state[i, k]
                b = state[j, k]
                state[i, k] = m00 * a + m01 * b
                state[j, k] = m10 * a + m11 * b

    @njit(cache=True)
    def _nb_apply_2q(state, m, q0, q1):
        dim, batch = state.shape
        b0 = 1 << q0
        b1 = 1 << q1
        idx = np.empty(4, np.int64)
        amp = np.empty(4, np.complex128)
        for i in range(dim):
            if i & b0 or i & b1:
                continue
            idx[0] = i
            idx[1] = i | b0
            idx[2] = i | b1
            idx[3] = i | b0 | b1
            for k in range(batch):
                for r in range(4):
                    amp[r] = state[idx[r], k]
                for r in range(4):
                    acc = 0j
                    for s in range(4):
                        acc += m[r, s] * amp[s]
                    state[idx[r], k] = acc

    @njit(cache=True)
    def _nb_apply_3q(state, m, q0, q1, q2):
        dim, batch = state.shape
        b0 = 1 << q0
        b1 = 1 << q1
        b2 = 1 << q2
        idx = np.empty(8, np.int64)
        amp = np.empty(8, np.complex128)
        for i in range(dim):
            if i & b0 or i & b1 or i & b2:
                continue
            for r in range(8):
                j = i
                if r & 1:
                    j |= b0
                if r & 2:
                    j |= b1
                if r & 4:
                    j |= b2
                idx[r] = j
            for k in range(batch):
                for r in range(8):
                    amp[r] = state[idx[r], k]
                for r in range(8):
                    acc = 0j
                    for s in range(8):
                        acc += m[r, s] * amp[s]
                    state[idx[r], k] = acc

    @njit(cache=True)
    def _nb_swap_scores(dist, l2p, front, ext, cands, ext_weight):
        n_c = cands.shape[0]
        costs = np.empty(n_c)
        for i in range(n_c):
            a = cands[i, 0]
            b = cands[i, 1]
            c = 0.0
            for r in range(front.shape[0]):
                p = l2p[front[r, 0]]
                s = l2p[front[r, 1]]
                p = b if p == a else (a if p == b else p)
                s = b if s == a else (a if s == b else s)
                c += dist[p, s]
            e = 0.0
            for r in range(ext.shape[0]):
                p = l2p[ext[r, 0]]
                s = l2p[ext[r, 1]]
                p = b if p == a else (a if p == b else p)
                s = b if s == a else (a if s == b else s)
                e += dist[p, s]
            costs[i] = c + ext_weight * e
        return costs

    numba_kernels = types.SimpleNamespace(
        name="numba",
        apply_1q=_nb_apply_1q,
        apply_2q=_nb_apply_2q,
        apply_3q=_nb_apply_3q,
        swap_scores=_nb_swap_scores,
    )


def _select():
    flag = os.environ.get("QCBENCH_DISABLE_NUMBA", "").strip().lower()
    if numba_kernels is None or flag not in ("", "0", "false", "no"):
        return numpy_kernels
    return numba_kernels


kernels = _select()
BACKEND = kernels.name
