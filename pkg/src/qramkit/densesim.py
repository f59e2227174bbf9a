"""Dense statevector engine for small registers.

Qubit 0 is the least significant bit of the amplitude index, matching the
little-endian ``mu`` of :mod:`qramkit.encoding`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .circuit import AnyCircuit, Gate

MAX_QUBITS = 26
NORM_TOL = 1e-12

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class DenseState:
    """Normalized amplitude vector over ``n`` qubits."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes, got {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n: int) -> "DenseState":
        amps = np.zeros(1 << n, dtype=complex)
        amps[0] = 1.0
        return cls(n, amps)

    @classmethod
    def basis(cls, bits: Sequence[int]) -> "DenseState":
        amps = np.zeros(1 << len(bits), dtype=complex)
        amps[sum(int(b) << q for q, b in enumerate(bits))] = 1.0
        return cls(len(bits), amps)

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex], normalize: bool = True) -> "DenseState":
        a = np.asarray(amps, dtype=complex)
        n = int(a.size).bit_length() - 1
        if normalize:
            a = a / np.linalg.norm(a)
        return cls(n, a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.amplitudes.copy())


def _index(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def _bit(idx: np.ndarray, q: int) -> np.ndarray:
    return (idx >> q) & 1


def apply_matrix(s: DenseState, U: np.ndarray, qubits: Sequence[int]) -> DenseState:
    """Apply a 2^k x 2^k matrix; ``qubits[0]`` is the least significant operand."""
    k = len(qubits)
    U = np.asarray(U, dtype=complex)
    if U.shape != (1 << k, 1 << k):
        raise ValueError("matrix size does not match operand count")
    for q in qubits:
        if not 0 <= q < s.n:
            raise ValueError(f"bad operand {q} for {s.n} qubits")
    psi = s.amplitudes.reshape((2,) * s.n) if s.n else s.amplitudes
    axes = [s.n - 1 - q for q in reversed(qubits)]
    Ut = U.reshape((2,) * (2 * k))
    out = np.tensordot(Ut, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return DenseState(s.n, out.reshape(-1))


def _permuted(s: DenseState, src: np.ndarray) -> DenseState:
    return DenseState(s.n, s.amplitudes[src])


def apply_gate(s: DenseState, g: Gate) -> DenseState:
    """Unitary action of one IR gate."""
    for q in g.qubits:
        if q >= s.n:
            raise ValueError(f"operand {q} out of range for {s.n} qubits")
    k, q = g.kind, g.qubits
    if k == "H":
        return apply_matrix(s, _H, q)
    if k == "Z":
        idx = _index(s.n)
        return DenseState(s.n, s.amplitudes * (1 - 2 * _bit(idx, q[0])))
    if k == "CZ":
        idx = _index(s.n)
        return DenseState(s.n, s.amplitudes * (1 - 2 * (_bit(idx, q[0]) & _bit(idx, q[1]))))
    idx = _index(s.n)
    if k == "X":
        src = idx ^ (1 << q[0])
    elif k == "CNOT":
        src = idx ^ (_bit(idx, q[0]) << q[1])
    elif k == "TOFFOLI":
        src = idx ^ ((_bit(idx, q[0]) & _bit(idx, q[1])) << q[2])
    elif k == "SWAP":
        d = _bit(idx, q[0]) ^ _bit(idx, q[1])
        src = idx ^ (d << q[0]) ^ (d << q[1])
    elif k == "FREDKIN":
        d = _bit(idx, q[0]) & (_bit(idx, q[1]) ^ _bit(idx, q[2]))
        src = idx ^ (d << q[1]) ^ (d << q[2])
    else:  # pragma: no cover - Gate validates kinds
        raise ValueError(k)
    return _permuted(s, src)


def apply_circuit(s: DenseState, c: AnyCircuit, offset: int = 0) -> DenseState:
    """Apply every gate of ``c``, shifting its qubit labels by ``offset``."""
    for g in c.gates:
        if offset:
            g = Gate(g.kind, tuple(q + offset for q in g.qubits))
        s = apply_gate(s, g)
    return s


def apply_on(s: DenseState, g: Gate, mapping: Sequence[int]) -> DenseState:
    """Apply ``g`` with its operand labels sent through ``mapping``."""
    return apply_gate(s, Gate(g.kind, tuple(mapping[q] for q in g.qubits)))


def tensor(a: DenseState, b: DenseState) -> DenseState:
    """a (low qubits) followed by b (high qubits)."""
    return DenseState(a.n + b.n, np.kron(b.amplitudes, a.amplitudes))


def permute_qubits(s: DenseState, order: Sequence[int]) -> DenseState:
    """New qubit k is old qubit ``order[k]``."""
    if sorted(order) != list(range(s.n)):
        raise ValueError("order must be a permutation")
    if s.n == 0:
        return s
    psi = s.amplitudes.reshape((2,) * s.n)
    # axis of qubit q is n-1-q
    axes = [s.n - 1 - order[s.n - 1 - a] for a in range(s.n)]
    return DenseState(s.n, np.transpose(psi, axes).reshape(-1))


def _project(s: DenseState, q: int, basis: str, bit: int) -> Tuple[np.ndarray, float]:
    """Unnormalized amplitudes of the remaining qubits after a projection."""
    psi = s.amplitudes.reshape((1 << (s.n - 1 - q), 2, 1 << q))
    if basis == "Z":
        out = psi[:, bit, :]
    elif basis == "X":
        sign = -1.0 if bit else 1.0
        out = (psi[:, 0, :] + sign * psi[:, 1, :]) / np.sqrt(2)
    else:
        raise ValueError(f"unsupported basis {basis!r}")
    out = out.reshape(-1)
    return out, float(np.vdot(out, out).real)


def measure_pauli(
    s: DenseState,
    q: int,
    basis: str,
    rng: Optional[np.random.Generator] = None,
    forced: Optional[int] = None,
) -> Tuple[int, DenseState, float]:
    """Measure qubit q in the X or Z basis and drop it from the register.

    Returns ``(eigenvalue, post_state, probability)``. With ``forced`` set to
    +1 or -1 that branch is taken; zero-probability branches raise.
    """
    if not 0 <= q < s.n:
        raise ValueError(f"bad qubit {q}")
    a0, p0 = _project(s, q, basis, 0)
    a1, p1 = _project(s, q, basis, 1)
    total = p0 + p1
    if forced is not None:
        if forced not in (1, -1):
            raise ValueError("forced outcome must be +1 or -1")
        bit = 0 if forced == 1 else 1
    else:
        if rng is None:
            raise ValueError("rng or forced outcome required")
        bit = int(rng.random() * total >= p0)
    amps, p = (a0, p0) if bit == 0 else (a1, p1)
    prob = p / total
    if prob <= 1e-14:
        raise ValueError("requested measurement branch has zero probability")
    return (1 - 2 * bit), DenseState(s.n - 1, amps / np.sqrt(p)), prob


def bell_state(a: int, b: int) -> DenseState:
    """Psi_{a,b} = 1/2 sum_{i,j} (-1)^(a i + b j + i j) |i, j>, i on qubit 0."""
    amps = np.zeros(4, dtype=complex)
    for i in (0, 1):
        for j in (0, 1):
            amps[i + 2 * j] = 0.5 * (-1) ** (a * i + b * j + i * j)
    return DenseState(2, amps)


def bell_measure(
    s: DenseState,
    q1: int,
    q2: int,
    rng: Optional[np.random.Generator] = None,
    forced: Optional[Tuple[int, int]] = None,
) -> Tuple[Tuple[int, int], DenseState, float]:
    """Bell measurement as CZ followed by X measurements of q1 then q2.

    Outcome bit a (b) is 0 when q1 (q2) reads X = +1. Both qubits are dropped.
    Returns ``((a, b), post_state, probability)``.
    """
    if q1 == q2:
        raise ValueError("Bell measurement needs two distinct qubits")
    s = apply_gate(s, Gate("CZ", (q1, q2)))
    f1 = None if forced is None else 1 - 2 * forced[0]
    f2 = None if forced is None else 1 - 2 * forced[1]
    v1, s, p1 = measure_pauli(s, q1, "X", rng, f1)
    v2, s, p2 = measure_pauli(s, q2 - (q2 > q1), "X", rng, f2)
    return ((1 - v1) // 2, (1 - v2) // 2), s, p1 * p2


def haar_random_state(n: int, rng: np.random.Generator) -> DenseState:
    """Uniformly distributed pure state (normalized complex Gaussian vector)."""
    if n > 22:
        raise ValueError("dense Haar sampling is limited to 22 qubits")
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return DenseState(n, v / np.linalg.norm(v))


def fidelity(s1: DenseState, s2: DenseState) -> float:
    """|<s1|s2>|^2."""
    if s1.n != s2.n:
        raise ValueError("states have different sizes")
    return float(abs(np.vdot(s1.amplitudes, s2.amplitudes)) ** 2)


def pauli_matrix(label: str) -> np.ndarray:
    """Dense matrix of a Pauli word; character k acts on qubit k."""
    single = {"I": np.eye(2, dtype=complex), "X": _X, "Z": _Z, "Y": np.array([[0, -1j], [1j, 0]])}
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(single[ch], out)
    return out


class LabeledState:
    """A dense state whose qubits are addressed by hashable labels.

    Measured qubits are dropped and the remaining labels keep their order.
    """

    def __init__(self, state: DenseState, labels: Sequence[object]):
        if len(labels) != state.n or len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct and match the qubit count")
        self.state = state
        self.labels = list(labels)

    def index(self, label: object) -> int:
        return self.labels.index(label)

    def append(self, part: DenseState, labels: Sequence[object]) -> None:
        if len(labels) != part.n or set(labels) & set(self.labels):
            raise ValueError("bad labels for appended qubits")
        self.state = tensor(self.state, part)
        self.labels.extend(labels)

    def gate(self, kind: str, *labels: object) -> None:
        self.state = apply_gate(self.state, Gate(kind, tuple(self.index(l) for l in labels)))

    def measure(
        self,
        label: object,
        basis: str,
        rng: Optional[np.random.Generator] = None,
        forced_bit: Optional[int] = None,
    ) -> Tuple[int, float]:
        """Measure and drop one qubit; returns (bit, probability), bit 0 <-> +1."""
        q = self.index(label)
        forced = None if forced_bit is None else 1 - 2 * forced_bit
        v, self.state, p = measure_pauli(self.state, q, basis, rng, forced)
        del self.labels[q]
        return (1 - v) // 2, p

    def bell_measure(
        self,
        l1: object,
        l2: object,
        rng: Optional[np.random.Generator] = None,
        forced: Optional[Tuple[int, int]] = None,
    ) -> Tuple[Tuple[int, int], float]:
        self.gate("CZ", l1, l2)
        a, p1 = self.measure(l1, "X", rng, None if forced is None else forced[0])
        b, p2 = self.measure(l2, "X", rng, None if forced is None else forced[1])
        return (a, b), p1 * p2

    def relabel(self, mapping: dict) -> None:
        self.labels = [mapping.get(l, l) for l in self.labels]
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("relabeling produced duplicates")

    def ordered(self, labels: Sequence[object]) -> DenseState:
        """The state with qubits reordered to ``labels`` (must cover all qubits)."""
        if sorted(map(repr, labels)) != sorted(map(repr, self.labels)):
            raise ValueError("labels must cover the register exactly")
        return permute_qubits(self.state, [self.index(l) for l in labels])
