"""Branch-level simulation of a faulty query and the good-address set.

Every gate of the layout maps basis states to basis states and every error
is a Pauli, so each address is tracked as two bus branches (a bitstring and a
phase each). The final H on the bus merges them into at most four
components. The dataset enters only through the load layer, as a parity
over the pointer qubits set at that time, so one propagation serves many
datasets.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from ..encoding import log2_exact
from .layout import PAULI_CODES, ErrorConfig, QueryLayout, query_layout
from . import _fallback

try:  # pragma: no cover - depends on the build
    from . import _core

    _HAVE_CORE = True
except ImportError:  # pragma: no cover
    _core = None
    _HAVE_CORE = False

KIND_CODES = {"SWAP": 0, "CNOT": 1, "TOFFOLI": 2}
_PHASE_MIX = np.array([0, 0x9E3779B97F4A7C15, 0xC2B2AE3D27D4EB4F, 0x165667B19E3779F9], dtype=np.uint64)
_UNIT = np.array([1, 1j, -1, -1j])


def default_backend() -> str:
    env = os.environ.get("QRAMKIT_BACKEND", "").lower()
    if env in ("numpy", "cython"):
        if env == "cython" and not _HAVE_CORE:
            raise ImportError("compiled kernel requested but not built")
        return env
    return "cython" if _HAVE_CORE else "numpy"


BACKEND = default_backend()


@dataclass(frozen=True)
class CompiledLayout:
    """Flat arrays of a layout for the propagation kernels."""

    layout: QueryLayout
    trig: np.ndarray
    gates: np.ndarray
    zob: np.ndarray
    groups: list

    @property
    def N(self) -> int:
        return self.layout.N


@lru_cache(maxsize=16)
def compile_layout(N: int) -> CompiledLayout:
    layout = query_layout(N)
    Q = layout.qubit_count
    depth = layout.depth
    trig = np.full((depth, Q), -1, dtype=np.int32)
    rows: List[Tuple[int, int, int, int]] = []
    for t, layer in enumerate(layout.circuit.layers):
        if t in (0, depth - 1) or t == layout.load_layer:
            continue
        for g in layer:
            q = g.qubits
            gid = len(rows)
            if g.kind == "SWAP":
                rows.append((0, q[0], q[1], 0))
                trig[t, q[0]] = trig[t, q[1]] = gid
            elif g.kind == "CNOT":
                rows.append((1, q[0], q[1], 0))
                trig[t, q[0]] = gid
            elif g.kind == "TOFFOLI":
                rows.append((2, q[0], q[1], q[2]))
                trig[t, q[0]] = gid
            else:
                raise ValueError(f"unexpected gate {g.kind} in the layout body")
    gates = np.array(rows, dtype=np.int32).reshape(-1, 4)
    rng = np.random.default_rng(0x5EED)
    zob = rng.integers(0, np.iinfo(np.uint64).max, size=Q, dtype=np.uint64, endpoint=True)
    zob[: layout.n + 1] = 0
    return CompiledLayout(layout, trig, gates, zob, _fallback._layer_groups(trig, gates))


@dataclass(frozen=True)
class BranchState:
    """Per-branch results; row ``branch * N + x``.

    ``phase`` excludes the data-dependent load phase, which is the parity of
    the dataset over the pointer qubits listed in ``load``.
    """

    N: int
    addr: np.ndarray
    bus: np.ndarray
    hash: np.ndarray
    phase: np.ndarray
    load: sparse.csr_matrix

    def load_parity(self, datasets: np.ndarray) -> np.ndarray:
        """(2N, n_datasets) parity of each dataset over the loaded pointers."""
        d = np.atleast_2d(np.asarray(datasets, dtype=np.int64))
        return np.asarray(self.load @ d.T) % 2


def _event_arrays(layout: QueryLayout, config: ErrorConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    depth = layout.depth
    t, q, p = config.arrays()
    if len(t) and (t.min() < 0 or t.max() >= depth or q.min() < 0 or q.max() >= layout.qubit_count):
        raise ValueError("error event outside the layout")
    # Paulis after the final bus H act as their H-conjugates before it.
    last = (t == depth - 1) & (q == layout.bus)
    p = p.copy()
    swap = {PAULI_CODES["X"]: PAULI_CODES["Z"], PAULI_CODES["Z"]: PAULI_CODES["X"], PAULI_CODES["Y"]: PAULI_CODES["Y"]}
    for i in np.nonzero(last)[0]:
        p[i] = swap[int(p[i])]
    order = np.argsort(t, kind="stable")
    t, q, p = t[order], q[order], p[order]
    ptr = np.searchsorted(t, np.arange(depth + 1), side="left").astype(np.int64)
    return ptr, q.astype(np.int32), p.astype(np.int8)


def branch_propagate(
    N: int | CompiledLayout, config: ErrorConfig, backend: Optional[str] = None
) -> BranchState:
    """Propagate every address of an N-address query under one error configuration."""
    comp = compile_layout(N) if isinstance(N, int) else N
    layout = comp.layout
    backend = backend or BACKEND
    ptr, q, p = _event_arrays(layout, config)
    args = (comp.trig, comp.gates, layout.load_layer, layout.n, layout.N, comp.zob, ptr, q, p)
    if backend == "cython":
        if not _HAVE_CORE:
            raise ImportError("compiled kernel not available")
        cap = 2 * layout.N * (layout.n + 4 + 4 * len(config))
        while True:
            out = _core.propagate(*args, cap)
            if not out[-1]:
                break
            cap *= 4
    elif backend == "numpy":
        out = _fallback.propagate(*args, groups=comp.groups)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    addr, bus, h, phase, lr, lc, _ = out
    load = sparse.csr_matrix(
        (np.ones(len(lr), dtype=np.int64), (lr, lc)), shape=(2 * layout.N, layout.N)
    )
    return BranchState(layout.N, addr, bus, h, phase, load)


# --- merging and grouping --------------------------------------------------


@dataclass(frozen=True)
class AddressOutcome:
    """Per (address, dataset) result after the final bus H."""

    single: np.ndarray  # one component only
    correct: np.ndarray  # single, address and data bit right
    key: np.ndarray  # ancilla hash mixed with the component phase


def merge_branches(state: BranchState, datasets: np.ndarray) -> AddressOutcome:
    """Combine the two bus branches for every address and dataset."""
    N = state.N
    d = np.atleast_2d(np.asarray(datasets, dtype=np.int64))
    par = state.load_parity(d)  # (2N, nd)
    ph = (state.phase[:, None].astype(np.int64) + 2 * par) % 4
    u0 = _UNIT[ph[:N]]
    u1 = _UNIT[ph[N:]]
    v0 = state.bus[:N, None].astype(np.int64)
    v1 = state.bus[N:, None].astype(np.int64)
    same = ((state.addr[:N] == state.addr[N:]) & (state.hash[:N] == state.hash[N:]))[:, None]
    a0 = (u0 + u1) / 2
    a1 = (u0 * (1 - 2 * v0) + u1 * (1 - 2 * v1)) / 2
    m0, m1 = np.abs(a0), np.abs(a1)
    single = same & (((m0 > 0.99) & (m1 < 0.01)) | ((m1 > 0.99) & (m0 < 0.01)))
    w = (m1 > m0).astype(np.int64)
    amp = np.where(w == 1, a1, a0)
    code = np.mod(np.rint(np.angle(amp) / (np.pi / 2)).astype(np.int64), 4)
    x = np.arange(N)[:, None]
    correct = single & (state.addr[:N, None] == x) & (w == d.T)
    key = state.hash[:N, None] + _PHASE_MIX[code]
    return AddressOutcome(single, correct, key)


@dataclass(frozen=True)
class GoodSet:
    """Largest set of addresses queried correctly with a common ancilla state."""

    members: Tuple[int, ...]
    ancilla_key: int

    @property
    def size(self) -> int:
        return len(self.members)


def good_sets(state: BranchState, datasets: np.ndarray) -> List[GoodSet]:
    out = merge_branches(state, datasets)
    result = []
    for c in range(out.correct.shape[1]):
        ok = np.nonzero(out.correct[:, c])[0]
        if ok.size == 0:
            result.append(GoodSet((), 0))
            continue
        keys = out.key[ok, c]
        vals, inv, counts = np.unique(keys, return_inverse=True, return_counts=True)
        best = int(np.argmax(counts))
        result.append(GoodSet(tuple(int(v) for v in ok[inv == best]), int(vals[best])))
    return result


def good_set_sizes(state: BranchState, datasets: np.ndarray) -> np.ndarray:
    out = merge_branches(state, datasets)
    sizes = np.zeros(out.correct.shape[1], dtype=np.int64)
    for c in range(out.correct.shape[1]):
        ok = out.correct[:, c]
        if ok.any():
            sizes[c] = np.unique(out.key[ok, c], return_counts=True)[1].max()
    return sizes


def good_set(config: ErrorConfig, D: Sequence[int], N: Optional[int] = None, backend: Optional[str] = None) -> GoodSet:
    N = N or len(D)
    if len(D) != N:
        raise ValueError("dataset size does not match N")
    log2_exact(N)
    state = branch_propagate(N, config, backend)
    return good_sets(state, np.asarray(D)[None, :])[0]
