"""Dense statevector oracle for faulty queries at small N."""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from ..circuit import Gate
from ..densesim import DenseState, apply_gate
from .layout import ErrorConfig, QueryLayout, query_layout

DENSE_MAX_QUBITS = 15


def dense_outputs(layout: QueryLayout, config: ErrorConfig, D: Sequence[int]) -> np.ndarray:
    """K|x, 0> for every address x as rows of a (N, 2**Q) array."""
    Q = layout.qubit_count
    if Q > DENSE_MAX_QUBITS:
        raise ValueError("layout too large for the dense oracle")
    circuit = layout.with_data(D)
    by_layer: dict = {}
    for t, q, p in config.events:
        by_layer.setdefault(t, []).append((q, p))
    out = np.zeros((layout.N, 1 << Q), dtype=complex)
    for x in range(layout.N):
        s = DenseState.basis([(x >> j) & 1 for j in range(layout.n)] + [0] * (Q - layout.n))
        for t, layer in enumerate(circuit.layers):
            for g in layer:
                s = apply_gate(s, g)
            for q, p in by_layer.get(t, ()):
                s = _pauli(s, q, p)
        out[x] = s.amplitudes
    return out


def _pauli(s: DenseState, q: int, p: str) -> DenseState:
    if p == "X":
        return apply_gate(s, Gate("X", (q,)))
    if p == "Z":
        return apply_gate(s, Gate("Z", (q,)))
    s = apply_gate(s, Gate("Z", (q,)))
    s = apply_gate(s, Gate("X", (q,)))
    return DenseState(s.n, 1j * s.amplitudes)


def _system_index(layout: QueryLayout, x: int, d: int) -> int:
    return x | (d << layout.n)


def ancilla_blocks(layout: QueryLayout, outputs: np.ndarray, D: Sequence[int]) -> np.ndarray:
    """A[alpha, y, x] = <y, D_y, alpha| K |x, 0>."""
    N, n = layout.N, layout.n
    sys_dim = 1 << (n + 1)
    psi = outputs.reshape(N, -1, sys_dim)  # [x][alpha][system]
    cols = np.array([_system_index(layout, y, D[y]) for y in range(N)])
    return np.transpose(psi[:, :, cols], (1, 2, 0))


def dense_good_set_size(layout: QueryLayout, config: ErrorConfig, D: Sequence[int]) -> int:
    """Largest group of addresses mapped to |x, D_x>|A> with one common |A>."""
    out = dense_outputs(layout, config, D)
    groups: List[Tuple[np.ndarray, int]] = []
    sys_dim = 1 << (layout.n + 1)
    for x in range(layout.N):
        v = out[x].reshape(-1, sys_dim)
        col = _system_index(layout, x, D[x])
        anc = v[:, col]
        if abs(np.linalg.norm(anc) - 1.0) > 1e-9:
            continue
        for i, (ref, count) in enumerate(groups):
            if abs(abs(np.vdot(ref, anc)) - 1.0) < 1e-9 and np.allclose(ref, anc, atol=1e-9):
                groups[i] = (ref, count + 1)
                break
        else:
            groups.append((anc, 1))
    return max((c for _, c in groups), default=0)


def haar_fidelity_exact(layout: QueryLayout, config: ErrorConfig, D: Sequence[int]) -> float:
    """Haar average of sum_alpha |<psi_D, alpha| K |psi>|^2, in closed form.

    With A_alpha[y, x] as in :func:`ancilla_blocks`, the fourth moment of a
    Haar state gives (sum_alpha |Tr A_alpha|^2 + ||A||_F^2) / (N (N + 1)).
    """
    A = ancilla_blocks(layout, dense_outputs(layout, config, D), D)
    N = layout.N
    tr = np.einsum("ayy->a", A)
    return float((np.sum(np.abs(tr) ** 2) + np.sum(np.abs(A) ** 2)) / (N * (N + 1)))


def haar_fidelity_sampled(
    layout: QueryLayout, config: ErrorConfig, D: Sequence[int], samples: int, rng: np.random.Generator
) -> Tuple[float, float]:
    """Monte Carlo over Haar-random address states; returns (mean, stderr)."""
    A = ancilla_blocks(layout, dense_outputs(layout, config, D), D)
    N = layout.N
    psi = rng.standard_normal((samples, N)) + 1j * rng.standard_normal((samples, N))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    amp = np.einsum("sy,ayx,sx->sa", psi.conj(), A, psi)
    f = np.sum(np.abs(amp) ** 2, axis=1)
    return float(f.mean()), float(f.std(ddof=1) / np.sqrt(samples))


def small_layout(N: int = 4) -> QueryLayout:
    return query_layout(N)
