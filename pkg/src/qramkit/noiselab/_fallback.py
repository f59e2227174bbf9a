"""Dense numpy branch propagation, used when the compiled kernel is missing.

Every branch is a row of a boolean matrix and each layer acts on whole
columns, so the cost is O(N) per gate instead of O(ones) per branch.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

KIND_SWAP, KIND_CNOT, KIND_TOFFOLI = 0, 1, 2


def _layer_groups(trig: np.ndarray, gates: np.ndarray) -> list:
    groups = []
    for t in range(trig.shape[0]):
        ids = np.unique(trig[t][trig[t] >= 0])
        g = gates[ids]
        groups.append({k: g[g[:, 0] == k] for k in (KIND_SWAP, KIND_CNOT, KIND_TOFFOLI)})
    return groups


def propagate(
    trig: np.ndarray,
    gates: np.ndarray,
    load_layer: int,
    n: int,
    N: int,
    zob: np.ndarray,
    ev_ptr: np.ndarray,
    ev_q: np.ndarray,
    ev_p: np.ndarray,
    capacity: int = 0,
    groups: list | None = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, bool]:
    """Propagate both bus branches of every address through the layout.

    Row ``r = branch * N + x``. Returns final address value, bus bit, additive
    hash of the set ancilla qubits, phase exponent of i (mod 4), and the
    (row, pointer) pairs of ones in the pointer block at the load layer.
    """
    depth, Q = trig.shape
    rows = 2 * N
    off = N - 1
    if groups is None:
        groups = _layer_groups(trig, gates)
    x = np.arange(rows) % N
    S = np.zeros((rows, Q), dtype=bool)
    for j in range(n):
        S[:, j] = (x >> j) & 1
    S[N:, n] = True
    phase = np.zeros(rows, dtype=np.int64)
    load_r = load_c = np.zeros(0, dtype=np.int64)
    for t in range(depth):
        if t == load_layer:
            load_r, load_c = np.nonzero(S[:, off : off + N])
        else:
            grp = groups[t]
            sw = grp[KIND_SWAP]
            if len(sw):
                a, b = sw[:, 1], sw[:, 2]
                tmp = S[:, a].copy()
                S[:, a] = S[:, b]
                S[:, b] = tmp
            cn = grp[KIND_CNOT]
            if len(cn):
                S[:, cn[:, 2]] ^= S[:, cn[:, 1]]
            tf = grp[KIND_TOFFOLI]
            if len(tf):
                S[:, tf[:, 3]] ^= S[:, tf[:, 1]] & S[:, tf[:, 2]]
        for e in range(ev_ptr[t], ev_ptr[t + 1]):
            q = ev_q[e]
            if ev_p[e] == 1:
                S[:, q] ^= True
            elif ev_p[e] == 2:
                phase += 1 + 2 * S[:, q]
                S[:, q] ^= True
            else:
                phase += 2 * S[:, q]
    weights = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    addr = S[:, :n].astype(np.int64) @ weights
    bus = S[:, n].astype(np.uint8)
    h = S.astype(np.uint64) @ zob
    return (
        addr,
        bus,
        h.astype(np.uint64),
        (phase % 4).astype(np.uint8),
        load_r.astype(np.int64),
        load_c.astype(np.int64),
        False,
    )
