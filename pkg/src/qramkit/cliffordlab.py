"""Pauli algebra, a stabilizer tableau and Clifford-hierarchy membership."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .circuit import CLIFFORD_KINDS, Gate
from .densesim import DenseState
from .encoding import log2_exact

# --- Pauli strings ---------------------------------------------------------


@dataclass(frozen=True)
class PauliString:
    """``i**k * prod_q X_q^x[q] Z_q^z[q]`` (X factors to the left of Z factors)."""

    x: Tuple[int, ...]
    z: Tuple[int, ...]
    k: int = 0

    def __post_init__(self) -> None:
        if len(self.x) != len(self.z):
            raise ValueError("x and z parts differ in length")
        object.__setattr__(self, "x", tuple(int(b) & 1 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) & 1 for b in self.z))
        object.__setattr__(self, "k", int(self.k) % 4)

    @classmethod
    def from_label(cls, label: str, sign: complex = 1) -> "PauliString":
        """Character q of ``label`` (I, X, Y, Z) acts on qubit q."""
        x = [ch in "XY" for ch in label]
        z = [ch in "ZY" for ch in label]
        k = sum(ch == "Y" for ch in label)  # Y = i X Z
        k += {1: 0, 1j: 1, -1: 2, -1j: 3}[sign]
        return cls(tuple(x), tuple(z), k)

    @classmethod
    def from_sparse(cls, n: int, ops: Dict[int, str], sign: complex = 1) -> "PauliString":
        label = ["I"] * n
        for q, op in ops.items():
            label[q] = op
        return cls.from_label("".join(label), sign)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def phase(self) -> complex:
        """Overall phase relative to the Hermitian word with Y = iXZ."""
        ys = sum(a & b for a, b in zip(self.x, self.z))
        return 1j ** ((self.k - ys) % 4)

    def label(self) -> str:
        return "".join("IXZY"[a + 2 * b] for a, b in zip(self.x, self.z))

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("size mismatch")
        cross = sum(a & b for a, b in zip(self.z, other.x))
        x = tuple(a ^ b for a, b in zip(self.x, other.x))
        z = tuple(a ^ b for a, b in zip(self.z, other.z))
        return PauliString(x, z, self.k + other.k + 2 * cross)

    def commutes(self, other: "PauliString") -> bool:
        s = sum(a & d for a, d in zip(self.x, other.z)) + sum(b & c for b, c in zip(self.z, other.x))
        return s % 2 == 0

    def squared_sign(self) -> int:
        p = self * self
        return 1 if p.k == 0 else -1

    def __str__(self) -> str:
        return {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.phase] + self.label()

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Z = np.diag([1.0 + 0j, -1.0])
        for a, b in zip(self.x, self.z):
            out = np.kron(np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b), out)
        return (1j ** self.k) * out


def apply_pauli_dense(s: DenseState, p: PauliString) -> DenseState:
    """Act with a Pauli string on a dense state."""
    if p.n != s.n:
        raise ValueError("size mismatch")
    idx = np.arange(1 << s.n, dtype=np.int64)
    xm = sum(b << q for q, b in enumerate(p.x))
    zm = sum(b << q for q, b in enumerate(p.z))
    par = np.zeros_like(idx)
    t = idx & zm
    while np.any(t):
        par ^= t & 1
        t >>= 1
    amps = s.amplitudes * (1 - 2 * par)
    return DenseState(s.n, (1j ** p.k) * amps[idx ^ xm])


def dense_expectation(s: DenseState, p: PauliString) -> complex:
    return complex(np.vdot(s.amplitudes, apply_pauli_dense(s, p).amplitudes))


# --- stabilizer tableau ----------------------------------------------------


class StabilizerTableau:
    """Destabilizer/stabilizer tableau; rows use the ``i**k X^x Z^z`` convention.

    Rows ``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers.
    """

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.k = np.zeros(2 * n, dtype=np.int64)
        idx = np.arange(n)
        self.x[idx, idx] = 1
        self.z[n + idx, idx] = 1

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n, t.x, t.z, t.k = self.n, self.x.copy(), self.z.copy(), self.k.copy()
        return t

    # gate updates
    def h(self, q: int) -> None:
        self.k += 2 * (self.x[:, q] & self.z[:, q])
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def cnot(self, c: int, t: int) -> None:
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def cz(self, a: int, b: int) -> None:
        self.k += 2 * (self.x[:, a] & self.x[:, b])
        self.z[:, a] ^= self.x[:, b]
        self.z[:, b] ^= self.x[:, a]

    def pauli_x(self, q: int) -> None:
        self.k += 2 * self.z[:, q]

    def pauli_z(self, q: int) -> None:
        self.k += 2 * self.x[:, q]

    def swap(self, a: int, b: int) -> None:
        self.x[:, [a, b]] = self.x[:, [b, a]]
        self.z[:, [a, b]] = self.z[:, [b, a]]

    def row(self, i: int) -> PauliString:
        return PauliString(tuple(self.x[i]), tuple(self.z[i]), int(self.k[i]))

    @property
    def generators(self) -> List[PauliString]:
        return [self.row(self.n + i) for i in range(self.n)]

    def _set_row(self, i: int, p: PauliString) -> None:
        self.x[i] = p.x
        self.z[i] = p.z
        self.k[i] = p.k

    def _rowmul(self, i: int, j: int) -> None:
        """row_i <- row_i * row_j."""
        cross = int(np.dot(self.z[i].astype(np.int64), self.x[j]))
        self.k[i] = (self.k[i] + self.k[j] + 2 * cross) % 4
        self.x[i] ^= self.x[j]
        self.z[i] ^= self.z[j]

    def _anticommuting_rows(self, p: PauliString) -> np.ndarray:
        px = np.array(p.x, dtype=np.uint8)
        pz = np.array(p.z, dtype=np.uint8)
        s = (self.x.astype(np.int64) @ pz + self.z.astype(np.int64) @ px) % 2
        return s.astype(bool)

    def peek(self, p: PauliString) -> int:
        """+1/-1 if p (Hermitian) is in the stabilizer group with that sign, else 0."""
        anti = self._anticommuting_rows(p)
        if anti[self.n :].any():
            return 0
        acc = PauliString((0,) * self.n, (0,) * self.n, 0)
        for i in np.nonzero(anti[: self.n])[0]:
            acc = acc * self.row(self.n + int(i))
        if acc.x != p.x or acc.z != p.z:
            return 0
        diff = (acc.k - p.k) % 4
        if diff == 0:
            return 1
        if diff == 2:
            return -1
        raise ValueError("measured operator is not Hermitian")

    def measure(
        self, p: PauliString, rng: Optional[np.random.Generator] = None, forced: Optional[int] = None
    ) -> int:
        """Projective measurement of a Hermitian Pauli string; returns +1/-1."""
        anti = self._anticommuting_rows(p)
        stab_anti = np.nonzero(anti[self.n :])[0]
        if stab_anti.size == 0:
            v = self.peek(p)
            if forced is not None and forced != v:
                raise ValueError("forced outcome has zero probability")
            return v
        piv = self.n + int(stab_anti[0])
        for i in np.nonzero(anti)[0]:
            if i != piv:
                self._rowmul(int(i), piv)
        self.x[piv - self.n] = self.x[piv]
        self.z[piv - self.n] = self.z[piv]
        self.k[piv - self.n] = self.k[piv]
        if forced is None:
            if rng is None:
                raise ValueError("rng or forced outcome required")
            v = 1 if rng.random() < 0.5 else -1
        else:
            v = forced
        self._set_row(piv, p if v == 1 else PauliString(p.x, p.z, p.k + 2))
        return v


def tableau_apply(t: StabilizerTableau, g: Gate) -> StabilizerTableau:
    """Conjugate every row by a Clifford gate (in place; returns t)."""
    if g.kind not in CLIFFORD_KINDS:
        raise ValueError(f"{g.kind} is not a Clifford gate")
    q = g.qubits
    {
        "X": lambda: t.pauli_x(q[0]),
        "Z": lambda: t.pauli_z(q[0]),
        "H": lambda: t.h(q[0]),
        "CZ": lambda: t.cz(q[0], q[1]),
        "CNOT": lambda: t.cnot(q[0], q[1]),
        "SWAP": lambda: t.swap(q[0], q[1]),
    }[g.kind]()
    return t


def tableau_measure(
    t: StabilizerTableau, p: PauliString, rng: Optional[np.random.Generator] = None, forced: Optional[int] = None
) -> Tuple[int, StabilizerTableau]:
    return t.measure(p, rng, forced), t


def tableau_to_dense(t: StabilizerTableau, seed: int = 0) -> DenseState:
    """Dense state stabilized by the tableau (n <= 14), fixed global phase."""
    if t.n > 14:
        raise ValueError("too many qubits for a dense copy")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(1 << t.n) + 1j * rng.standard_normal(1 << t.n)
    s = DenseState(t.n, v / np.linalg.norm(v))
    for g in t.generators:
        gs = apply_pauli_dense(s, g)
        amps = (s.amplitudes + gs.amplitudes) / 2
        s = DenseState(t.n, amps / np.linalg.norm(amps))
    a = s.amplitudes
    j = int(np.argmax(np.abs(a)))
    return DenseState(t.n, a * (abs(a[j]) / a[j]))


# --- Clifford hierarchy ----------------------------------------------------


def _pauli_stack(n: int) -> np.ndarray:
    mats = [PauliString.from_label("".join(w)).matrix() for w in product("IXYZ", repeat=n)]
    return np.array(mats[1:])  # drop the identity


def _generator_stack(n: int) -> np.ndarray:
    mats = []
    for q in range(n):
        for op in "XZ":
            mats.append(PauliString.from_sparse(n, {q: op}).matrix())
    return np.array(mats)


def _is_pauli_batch(M: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Which unitary matrices in the batch are proportional to a Pauli string."""
    B, d, _ = M.shape
    rows = np.argmax(np.abs(M), axis=1)  # (B, d): row of the leading entry per column
    cols = np.arange(d)
    lead = M[np.arange(B)[:, None], rows, cols[None, :]]
    ok = np.all(np.abs(np.abs(lead) - 1) < tol, axis=1)
    shift = rows[:, :1]
    ok &= np.all(rows == (cols[None, :] ^ shift), axis=1)
    ratio = lead / lead[:, :1]
    ok &= np.all(np.abs(np.abs(ratio.real) - 1) < tol, axis=1)
    sign_bits = (ratio.real < 0).astype(np.int64)  # (B, d)
    n = d.bit_length() - 1
    zmask = np.zeros(B, dtype=np.int64)
    for b in range(n):
        zmask |= sign_bits[:, 1 << b] << b
    par = np.zeros((B, d), dtype=np.int64)
    t = cols[None, :] & zmask[:, None]
    while np.any(t):
        par ^= t & 1
        t = t >> 1
    ok &= np.all(par == sign_bits, axis=1)
    return ok


def _conjugate(U: np.ndarray, P: np.ndarray) -> np.ndarray:
    """U P U^dagger for stacks U (B,d,d) and P (m,d,d) -> (B,m,d,d)."""
    Ub = U[:, None]
    return np.matmul(np.matmul(Ub, P[None]), np.conj(np.swapaxes(Ub, -1, -2)))


_CHUNK = 4096


def _in_level(Us: np.ndarray, K: int, cache: dict) -> np.ndarray:
    B, d, _ = Us.shape
    n = d.bit_length() - 1
    if K == 0:
        return _is_pauli_batch(Us)
    if K == 1:
        P = cache.setdefault(("gen", n), _generator_stack(n))
    else:
        P = cache.setdefault(("all", n), _pauli_stack(n))
    m = len(P)
    out = np.ones(B, dtype=bool)
    step = max(1, _CHUNK // m)
    for start in range(0, B, step):
        block = Us[start : start + step]
        conj = _conjugate(block, P).reshape(-1, d, d)
        ok = _in_level(conj, K - 1, cache).reshape(len(block), m).all(axis=1)
        out[start : start + step] = ok
    return out


def in_hierarchy_level(U: np.ndarray, K: int) -> bool:
    U = _check_unitary(U)
    return bool(_in_level(U[None], K, {})[0])


def _check_unitary(U: np.ndarray) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    if U.shape != (d, d) or d & (d - 1) or d < 2:
        raise ValueError("operator must be a square matrix on whole qubits")
    if d > 16:
        raise ValueError("hierarchy checks are limited to 4 qubits")
    if not np.allclose(U @ U.conj().T, np.eye(d), atol=1e-10):
        raise ValueError("operator is not unitary")
    return U


def hierarchy_level(U: np.ndarray, kmax: int = 4) -> Optional[int]:
    """Lowest K <= kmax with U in C_K (up to global phase), or None."""
    U = _check_unitary(U)
    if kmax > 4:
        raise ValueError("kmax is limited to 4")
    cache: dict = {}
    for K in range(kmax + 1):
        if _in_level(U[None], K, cache)[0]:
            return K
    return None


def multi_controlled_z(n_controls: int) -> np.ndarray:
    """C_nZ = 1 - 2 |1..1><1..1| on n_controls + 1 qubits."""
    d = 1 << (n_controls + 1)
    diag = np.ones(d, dtype=complex)
    diag[-1] = -1
    return np.diag(diag)


def t_n(n: int) -> np.ndarray:
    """exp(-i Z pi / 2**n) exactly as written; T_3 is the usual T gate."""
    a = np.pi / (1 << n)
    return np.diag([np.exp(-1j * a), np.exp(1j * a)])


def qram_dense(N: int, D: Sequence[int]) -> np.ndarray:
    """Permutation |x, B> -> |x, B xor D_x>; address on qubits 0..logN-1, bus on qubit logN."""
    log2_exact(N)
    if len(D) != N:
        raise ValueError("dataset length must equal N")
    if N > 8:
        raise ValueError("dense QRAM operator is limited to N <= 8")
    d = 2 * N
    U = np.zeros((d, d), dtype=complex)
    for x in range(N):
        for B in (0, 1):
            U[x + N * (B ^ int(D[x])), x + N * B] = 1
    return U


def adversarial_dataset(N: int) -> Tuple[int, ...]:
    """D_x = 0 iff x = (1, ..., 1)."""
    return tuple(0 if x == N - 1 else 1 for x in range(N))


def loading_operator(D: Sequence[int]) -> np.ndarray:
    """W_D = tensor_l Z_l^{D_l} on N qubits."""
    ops = {l: "Z" for l, d in enumerate(D) if d}
    return PauliString.from_sparse(len(D), ops).matrix()


def conjugation_identity_check(N: int, up_to_sign: bool = False) -> bool:
    """U Z_bus U^-1 == -Z_bus C_{logN-1}Z for the adversarial dataset."""
    n = log2_exact(N)
    if N not in (2, 4, 8):
        raise ValueError("N must be 2, 4 or 8")
    U = qram_dense(N, adversarial_dataset(N))
    z_bus = np.kron(np.diag([1.0, -1.0]), np.eye(N))
    lhs = U @ z_bus @ U.conj().T
    rhs = -np.kron(np.diag([1.0, -1.0]), multi_controlled_z(n - 1))
    if np.allclose(lhs, rhs, atol=1e-12, rtol=0):
        return True
    return up_to_sign and bool(np.allclose(lhs, -rhs, atol=1e-12, rtol=0))


# --- the N = 2 inversion resource as a graph state --------------------------

PHI2_N2_STABILIZERS = ("X1Z4", "X4Z1Z7", "X5Z2Z8", "X7Z4Z8", "X8Z5Z7", "X2Z5Z6", "X3Z6", "X6Z3X5")
PHI2_N2_LINEAR_CHAIN = ("X1Z4", "Z1X4Z7", "Z4X7Z8", "Z7X8Z5", "Z8X5Z2", "Z5X2Z3", "Z2X3")


def parse_onebased(word: str, n: int) -> PauliString:
    """Parse e.g. ``X6Z3X5`` with 1-based qubit labels into a PauliString."""
    ops: Dict[int, str] = {}
    i = 0
    while i < len(word):
        op = word[i]
        j = i + 1
        while j < len(word) and word[j].isdigit():
            j += 1
        q = int(word[i + 1 : j]) - 1
        if q in ops:
            raise ValueError(f"qubit {q + 1} repeated in {word}")
        ops[q] = op
        i = j
    return PauliString.from_sparse(n, ops)


@dataclass(frozen=True)
class GraphStateReport:
    pre_measurement: Dict[str, int]
    post_chain: Dict[str, int]
    outcome: int

    @property
    def ok(self) -> bool:
        return all(v == 1 for v in self.post_chain.values())


def verify_phi2_linear_graph(forced_outcome: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> GraphStateReport:
    """Check the N=2 inversion resource against its stabilizer lists.

    Reports, for each listed pre-measurement word, its sign in the stabilizer
    group (0 if absent). Then measures X on qubit 6, fixes a -1 outcome with
    X on qubit 3, applies H on qubit 3 and reports each chain generator.
    """
    from .queryproto import build_phi2_tableau

    t = build_phi2_tableau(2).tableau
    n = t.n
    pre = {w: t.peek(parse_onebased(w, n)) for w in PHI2_N2_STABILIZERS}
    if rng is None and forced_outcome is None:
        forced_outcome = 1
    v = t.measure(parse_onebased("X6", n), rng, forced_outcome)
    if v == -1:
        t.pauli_x(2)
    t.h(2)
    post = {w: t.peek(parse_onebased(w, n)) for w in PHI2_N2_LINEAR_CHAIN}
    return GraphStateReport(pre, post, v)
