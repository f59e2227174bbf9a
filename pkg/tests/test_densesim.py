from __future__ import annotations

import numpy as np
import pytest

from qramkit.circuit import Gate, build_nohe_parallel, expand_gadgets, simulate_bits
from qramkit.densesim import (
    DenseState,
    LabeledState,
    apply_circuit,
    apply_gate,
    apply_matrix,
    bell_measure,
    bell_state,
    fidelity,
    haar_random_state,
    measure_pauli,
    pauli_matrix,
    permute_qubits,
    tensor,
)


def _full(U, qubits, n):
    """Dense matrix of U on ``qubits`` of an n-qubit register, via basis columns."""
    cols = [apply_matrix(DenseState.basis([(i >> q) & 1 for q in range(n)]), U, qubits).amplitudes for i in range(1 << n)]
    return np.array(cols).T


def test_basis_little_endian():
    s = DenseState.basis([1, 0, 1])
    assert s.amplitudes[5] == 1


def test_apply_matrix_operand_order():
    cnot = np.eye(4)[[0, 3, 2, 1]]  # control = operand 0 (low bit)
    s = apply_matrix(DenseState.basis([0, 1, 1]), cnot, [2, 0])
    assert abs(s.amplitudes[DenseState.basis([1, 1, 1]).amplitudes.argmax()]) == 1


@pytest.mark.parametrize("kind", ["X", "Z", "H", "CZ", "CNOT", "SWAP", "TOFFOLI", "FREDKIN"])
def test_gates_match_matrices(kind):
    rng = np.random.default_rng(1)
    n = 4
    ops = {1: (2,), 2: (3, 1), 3: (2, 0, 3)}
    arity = {"X": 1, "Z": 1, "H": 1, "CZ": 2, "CNOT": 2, "SWAP": 2, "TOFFOLI": 3, "FREDKIN": 3}[kind]
    q = ops[arity]
    g = Gate(kind, q)
    mats = {
        "X": pauli_matrix("X"),
        "Z": pauli_matrix("Z"),
        "H": np.array([[1, 1], [1, -1]]) / np.sqrt(2),
        "CZ": np.diag([1, 1, 1, -1]),
        "CNOT": np.eye(4)[[0, 3, 2, 1]],
        "SWAP": np.eye(4)[[0, 2, 1, 3]],
        "TOFFOLI": np.eye(8)[[0, 1, 2, 7, 4, 5, 6, 3]],
        "FREDKIN": np.eye(8)[[0, 1, 2, 5, 4, 3, 6, 7]],
    }
    psi = haar_random_state(n, rng)
    a = apply_gate(psi, g)
    b = apply_matrix(psi, mats[kind], q)
    assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-12)


def test_dense_matches_classical_simulation():
    c = expand_gadgets(build_nohe_parallel(8, True))
    for x in range(16):
        bits = [(x >> j) & 1 for j in range(4)] + [0] * (c.qubit_count - 4)
        out = apply_circuit(DenseState.basis(bits), c)
        want = simulate_bits(c, np.array(bits, dtype=bool)[:, None])[:, 0]
        assert abs(out.amplitudes[sum(int(b) << q for q, b in enumerate(want))]) == pytest.approx(1)


def test_tensor_and_permute():
    a = DenseState.basis([1, 0])
    b = DenseState.basis([1])
    t = tensor(a, b)
    assert t.amplitudes[0b101] == 1
    p = permute_qubits(t, [2, 0, 1])
    assert p.amplitudes[0b011] == 1


def test_measure_pauli_probabilities():
    plus = apply_gate(DenseState.zero(1), Gate("H", (0,)))
    s = tensor(plus, DenseState.basis([1]))
    v, post, p = measure_pauli(s, 0, "X", forced=1)
    assert v == 1 and p == pytest.approx(1.0)
    assert np.allclose(post.amplitudes, [0, 1])
    v, post, p = measure_pauli(s, 0, "Z", forced=-1)
    assert p == pytest.approx(0.5)
    with pytest.raises(ValueError):
        measure_pauli(s, 0, "X", forced=-1)
    with pytest.raises(ValueError):
        measure_pauli(s, 0, "Z")


def test_measure_statistics():
    rng = np.random.default_rng(3)
    amps = np.array([np.sqrt(0.2), np.sqrt(0.8)])
    s = DenseState(1, amps)
    counts = sum(measure_pauli(s, 0, "Z", rng)[0] == -1 for _ in range(20000))
    assert abs(counts / 20000 - 0.8) < 0.02


def test_bell_states_orthonormal_and_measured():
    states = [bell_state(a, b) for a in (0, 1) for b in (0, 1)]
    G = np.array([[np.vdot(u.amplitudes, v.amplitudes) for v in states] for u in states])
    assert np.allclose(G, np.eye(4))
    for a in (0, 1):
        for b in (0, 1):
            out, post, p = bell_measure(bell_state(a, b), 0, 1, forced=(a, b))
            assert out == (a, b) and p == pytest.approx(1.0) and post.n == 0


def test_fidelity_and_haar():
    rng = np.random.default_rng(0)
    s = haar_random_state(3, rng)
    assert s.norm == pytest.approx(1.0)
    assert fidelity(s, s) == pytest.approx(1.0)
    ph = DenseState(3, s.amplitudes * np.exp(0.7j))
    assert fidelity(s, ph) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fidelity(s, DenseState.zero(2))


def test_pauli_matrix_order():
    assert np.allclose(pauli_matrix("XI"), np.kron(np.eye(2), pauli_matrix("X")))


def test_labeled_state():
    ls = LabeledState(DenseState.zero(1), ["a"])
    ls.append(DenseState.basis([1]), ["b"])
    ls.gate("CNOT", "b", "a")
    bit, p = ls.measure("a", "Z", forced_bit=1)
    assert bit == 1 and p == pytest.approx(1.0) and ls.labels == ["b"]
    with pytest.raises(ValueError):
        LabeledState(DenseState.zero(2), ["x", "x"])


def test_state_validation():
    with pytest.raises(ValueError):
        DenseState(2, np.ones(3))
    with pytest.raises(ValueError):
        permute_qubits(DenseState.zero(2), [0, 0])
