"""Clifford query pipeline over a pre-assembled resource state.

The query register R (logN qubits) is teleported through the encoding V by
Bell measurements against a resource state, the memory is loaded by Z gates
whose positions depend on the outcomes, and the encoding is undone by single
qubit Pauli measurements with Pauli-frame bookkeeping.

Register of the assembled resource: I (logN), L (N), P (two ancillas per
controlled swap) and F (logN + 1). ``F[j]`` holds encoding position
``2**j - 1``; ``F[logN]`` is the bus.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .circuit import Gate, build_nohe_parallel, bus_input_qubit, register_size
from .cliffordlab import PauliString, StabilizerTableau
from .densesim import (
    DenseState,
    LabeledState,
    apply_gate,
    bell_state,
    permute_qubits,
    tensor,
)
from .encoding import Dataset, load_bits, log2_exact

DENSE_MAX_N = 4
Triple = Tuple[int, int, int]


# --- layout ------------------------------------------------------------------


def inversion_rounds(N: int) -> List[List[Triple]]:
    """Controlled swaps of the bus encoding grouped by layer, last layer first."""
    c = build_nohe_parallel(N, with_bus=True)
    rounds = []
    for layer in reversed(c.layers[c.swap_layers :]):
        rounds.append([g.qubits for g in layer if g.kind == "FREDKIN"])
    return rounds


def inversion_order(N: int) -> List[Triple]:
    return [t for r in inversion_rounds(N) for t in r]


def surviving_positions(N: int) -> List[int]:
    """Encoding positions left after inversion: 2**j - 1 for j = 0..logN."""
    return [(1 << j) - 1 for j in range(log2_exact(N) + 1)]


@dataclass(frozen=True)
class RegisterLayout:
    """Physical index sets of the query input and the resource register."""

    N: int
    R: Tuple[int, ...]
    I: Tuple[int, ...]
    L: Tuple[int, ...]
    P: Tuple[int, ...]
    F: Tuple[int, ...]
    D: Tuple[int, ...]
    Dp: Tuple[int, ...]

    @classmethod
    def for_size(cls, N: int) -> "RegisterLayout":
        n = log2_exact(N)
        if N < 2:
            raise ValueError("N must be at least 2")
        n_p = 2 * (2 * N - n - 2)
        R = tuple(range(n))
        start = n
        I = tuple(range(start, start + n))
        start += n
        L = tuple(range(start, start + N))
        start += N
        P = tuple(range(start, start + n_p))
        start += n_p
        F = tuple(range(start, start + n + 1))
        size = 2 * N - 1
        D = tuple(range(size))
        Dp = tuple(range(size, 2 * size))
        return cls(N, R, I, L, P, F, D, Dp)

    @property
    def resource_size(self) -> int:
        return len(self.I) + len(self.L) + len(self.P) + len(self.F)

    def check(self) -> None:
        sets = [self.R, self.I, self.L, self.P, self.F]
        flat = [q for s in sets for q in s]
        if len(flat) != len(set(flat)):
            raise ValueError("index sets overlap")
        if self.resource_size != 5 * self.N - 3:
            raise ValueError("resource register must hold 5N-3 qubits")


# --- Pauli frame -----------------------------------------------------------


class PauliFrame:
    """Pending Pauli byproduct X^x Z^z on labelled qubits, up to global phase."""

    def __init__(self) -> None:
        self.x: Dict[object, int] = {}
        self.z: Dict[object, int] = {}

    def add(self, q: object, x: int = 0, z: int = 0) -> None:
        self.x[q] = self.x.get(q, 0) ^ (x & 1)
        self.z[q] = self.z.get(q, 0) ^ (z & 1)

    def get(self, q: object) -> Tuple[int, int]:
        return self.x.get(q, 0), self.z.get(q, 0)

    def drop(self, q: object) -> Tuple[int, int]:
        return self.x.pop(q, 0), self.z.pop(q, 0)

    def cnot(self, c: object, t: object) -> None:
        xc, _ = self.get(c)
        _, zt = self.get(t)
        self.add(t, x=xc)
        self.add(c, z=zt)

    def cz(self, a: object, b: object) -> None:
        xa, _ = self.get(a)
        xb, _ = self.get(b)
        self.add(a, z=xb)
        self.add(b, z=xa)

    def support(self) -> List[object]:
        return [q for q in set(self.x) | set(self.z) if self.x.get(q, 0) or self.z.get(q, 0)]

    def to_pauli(self, labels: Sequence[object]) -> PauliString:
        return PauliString(
            tuple(self.x.get(q, 0) for q in labels), tuple(self.z.get(q, 0) for q in labels)
        )

    def apply(self, reg: LabeledState, labels: Optional[Sequence[object]] = None) -> None:
        """Apply the frame physically on ``labels`` (default: all present) and clear them."""
        for q in list(labels if labels is not None else reg.labels):
            x, z = self.drop(q)
            if x:
                reg.gate("X", q)
            if z:
                reg.gate("Z", q)


# --- resource states -------------------------------------------------------


def _require_dense(N: int) -> int:
    n = log2_exact(N)
    if not 2 <= N <= DENSE_MAX_N:
        raise ValueError(f"dense mode supports N in 2..{DENSE_MAX_N}, got {N}")
    return n


def encoding_v(N: int) -> List[Gate]:
    """V = U_NOHE(with bus) after H on the bus input."""
    gates = [Gate("H", (bus_input_qubit(N),))]
    return gates + list(build_nohe_parallel(N, with_bus=True).gates)


def apply_v(s: DenseState, N: int, offset: int = 0) -> DenseState:
    for g in encoding_v(N):
        s = apply_gate(s, Gate(g.kind, tuple(q + offset for q in g.qubits)))
    return s


def apply_v_inverse(s: DenseState, N: int, offset: int = 0) -> DenseState:
    for g in reversed(encoding_v(N)):
        s = apply_gate(s, Gate(g.kind, tuple(q + offset for q in g.qubits)))
    return s


def embed_address(psi: DenseState, N: int) -> DenseState:
    """|psi> on the address qubits of the 2N-1 qubit encoding register."""
    size = register_size(N, True)
    return tensor(psi, DenseState.zero(size - psi.n))


def build_phi1(N: int) -> DenseState:
    """logN Bell pairs (I_j, D_j) with V applied to the D halves; order [I][D]."""
    n = _require_dense(N)
    size = register_size(N, True)
    s = DenseState.zero(0)
    for _ in range(n):
        s = tensor(s, bell_state(0, 0))
    # pair j sits on qubits (2j, 2j+1); bring to [I][D_address]
    order = [2 * j for j in range(n)] + [2 * j + 1 for j in range(n)]
    s = permute_qubits(s, order)
    s = tensor(s, DenseState.zero(size - n))
    return apply_v(s, N, offset=n)


def gate_teleport(
    psi: DenseState,
    phi1: DenseState,
    rng: Optional[np.random.Generator] = None,
    forced: Optional[Tuple[Sequence[int], Sequence[int]]] = None,
) -> Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], DenseState]:
    """Bell-measure R_j with I_j; returns ((a, b), V X^b Z^a |psi, 0>)."""
    n = psi.n
    if phi1.n < 2 * n:
        raise ValueError("resource does not match the input size")
    size = phi1.n - n
    reg = LabeledState(tensor(psi, phi1), [("R", j) for j in range(n)] + [("I", j) for j in range(n)] + [("D", q) for q in range(size)])
    a, b = [], []
    for j in range(n):
        f = None if forced is None else (forced[0][j], forced[1][j])
        (aj, bj), _ = reg.bell_measure(("R", j), ("I", j), rng, f)
        a.append(aj)
        b.append(bj)
    return (tuple(a), tuple(b)), reg.ordered([("D", q) for q in range(size)])


def adaptive_load(D: Dataset | Sequence[int], b: Sequence[int]) -> List[Gate]:
    """Z on L_l wherever the loaded bit for pointer l is 1."""
    return [Gate("Z", (l,)) for l, bit in enumerate(load_bits(D, b)) if bit]


# --- gadget inversion ------------------------------------------------------


@dataclass(frozen=True)
class GadgetRecord:
    """Classical record of one gadget inversion."""

    s0: int
    basis: str
    outcomes: Tuple[int, int]

    def correction(self) -> Tuple[int, int]:
        """Z exponents on (control, first target)."""
        alpha, beta = self.outcomes
        return (alpha, beta) if self.s0 == 0 else (beta, alpha)


def _gadget_unitary_part(reg: LabeledState, i: object, j: object, k: object, A: object, B: object) -> None:
    reg.gate("CNOT", k, j)
    reg.gate("CZ", A, i)
    reg.gate("CZ", B, j)


def _measure_ancillas(
    reg: LabeledState,
    A: object,
    B: object,
    s0: int,
    rng: Optional[np.random.Generator],
    forced: Optional[Tuple[int, int]],
) -> GadgetRecord:
    basis = "Z" if s0 == 0 else "X"
    alpha, _ = reg.measure(A, basis, rng, None if forced is None else forced[0])
    beta, _ = reg.measure(B, basis, rng, None if forced is None else forced[1])
    return GadgetRecord(s0, basis, (alpha, beta))


def invert_gadget(
    s: DenseState,
    triple: Triple,
    ancillas: Optional[Tuple[int, int]] = None,
    rng: Optional[np.random.Generator] = None,
    forced_s0: Optional[int] = None,
    forced_outcomes: Optional[Tuple[int, int]] = None,
    correct: bool = True,
) -> Tuple[DenseState, GadgetRecord]:
    """Undo one controlled swap whose second target was |0> before the gate.

    ``triple`` is (control, first target, zeroed target). Without ``ancillas``
    a Bell pair is appended as the two top qubits. The zeroed target and the
    ancillas are removed; other qubits keep their relative order. With
    ``correct=False`` the Z byproduct is left for the caller.
    """
    i, j, k = triple
    n = s.n
    reg = LabeledState(s, list(range(n)))
    if ancillas is None:
        reg.append(bell_state(0, 0), ["A", "B"])
        A, B = "A", "B"
    else:
        A, B = ancillas
    _gadget_unitary_part(reg, i, j, k, A, B)
    s0, _ = reg.measure(k, "X", rng, forced_s0)
    rec = _measure_ancillas(reg, A, B, s0, rng, forced_outcomes)
    if correct:
        ci, cj = rec.correction()
        if ci:
            reg.gate("Z", i)
        if cj:
            reg.gate("Z", j)
    return reg.state, rec


def invert_nohe(
    s: DenseState,
    N: int,
    rng: Optional[np.random.Generator] = None,
    mode: str = "adaptive",
    with_bus: bool = True,
) -> Tuple[DenseState, List[List[GadgetRecord]]]:
    """Undo the encoding on a 2N-1 (or N-1) qubit register by measurements.

    Returns the logN (+ bus) input qubits in order x_0 .. x_{logN-1}, bus and
    the per-round gadget records. With the bus, the final H on the bus is
    included, so the map is V^{-1}. ``adaptive`` inverts gadget by gadget;
    ``frame`` applies every entangling gate and X measurement first and then
    runs the ancilla measurements round by round on a Z frame.
    """
    if mode not in ("adaptive", "frame"):
        raise ValueError(f"unknown mode {mode!r}")
    size = register_size(N, with_bus)
    if s.n != size:
        raise ValueError(f"expected {size} qubits, got {s.n}")
    c = build_nohe_parallel(N, with_bus=with_bus)
    rounds = [[g.qubits for g in layer if g.kind == "FREDKIN"] for layer in reversed(c.layers[c.swap_layers :])]
    reg = LabeledState(s, list(range(size)))
    records: List[List[GadgetRecord]] = []
    if mode == "adaptive":
        for r, gadgets in enumerate(rounds):
            recs = []
            for g_idx, (i, j, k) in enumerate(gadgets):
                A, B = ("A", r, g_idx), ("B", r, g_idx)
                reg.append(bell_state(0, 0), [A, B])
                _gadget_unitary_part(reg, i, j, k, A, B)
                s0, _ = reg.measure(k, "X", rng)
                rec = _measure_ancillas(reg, A, B, s0, rng, None)
                ci, cj = rec.correction()
                if ci:
                    reg.gate("Z", i)
                if cj:
                    reg.gate("Z", j)
                recs.append(rec)
            records.append(recs)
    else:
        raw: Dict[Tuple[int, int], int] = {}
        for r, gadgets in enumerate(rounds):
            for g_idx, (i, j, k) in enumerate(gadgets):
                A, B = ("A", r, g_idx), ("B", r, g_idx)
                reg.append(bell_state(0, 0), [A, B])
                _gadget_unitary_part(reg, i, j, k, A, B)
                raw[r, g_idx], _ = reg.measure(k, "X", rng)
        frame = PauliFrame()
        for r, gadgets in enumerate(rounds):
            recs = []
            for g_idx, (i, j, k) in enumerate(gadgets):
                frame.cnot(k, j)
                s0 = raw[r, g_idx] ^ frame.drop(k)[1]
                rec = _measure_ancillas(reg, ("A", r, g_idx), ("B", r, g_idx), s0, rng, None)
                ci, cj = rec.correction()
                frame.add(i, z=ci)
                frame.add(j, z=cj)
                recs.append(rec)
            records.append(recs)
        frame.apply(reg)
    # undo the swap stage by relabeling
    n_out = log2_exact(N) + (1 if with_bus else 0)
    out = reg.ordered(swap_image(N, with_bus))
    if with_bus:
        out = apply_gate(out, Gate("H", (n_out - 1,)))
    return out, records


def swap_image(N: int, with_bus: bool = True) -> List[int]:
    """Physical position of each input qubit after the swap stage."""
    n_out = log2_exact(N) + (1 if with_bus else 0)
    c = build_nohe_parallel(N, with_bus=with_bus)
    where = list(range(register_size(N, with_bus)))
    for layer in c.layers[: c.swap_layers]:
        for g in layer:
            a, b = g.qubits
            for q in range(len(where)):
                if where[q] == a:
                    where[q] = b
                elif where[q] == b:
                    where[q] = a
    return where[:n_out]


# --- inversion resource ----------------------------------------------------


@dataclass
class Phi2Resource:
    """Stabilizer form of the inversion resource.

    Qubit order: D' (2N-1), Z (2N-1), then one ancilla pair per controlled
    swap in inversion order. ``gadgets[g]`` gives (i, j, k, A, B) as tableau
    indices. ``s0`` is filled once the zeroed targets are measured.
    """

    N: int
    tableau: StabilizerTableau
    gadgets: List[Tuple[int, int, int, int, int]]
    s0: Optional[Tuple[int, ...]] = None


def build_phi2_tableau(
    N: int,
    measure: bool = False,
    s0: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
) -> Phi2Resource:
    """Bell pairs (D'_a, Z_a) with the Z halves pushed through the inversion circuit.

    With ``measure`` the zeroed targets are measured in X (forced to ``s0`` if
    given) and stay in the tableau as product factors.
    """
    log2_exact(N)
    if N < 2 or N > 1 << 6:
        raise ValueError("tableau mode supports 2 <= N <= 64")
    size = register_size(N, True)
    order = inversion_order(N)
    n = 2 * size + 2 * len(order)
    t = StabilizerTableau(n)
    for a in range(size):
        t.h(a)
        t.h(size + a)
        t.cz(a, size + a)
    gadgets = []
    for g, (i, j, k) in enumerate(order):
        A, B = 2 * size + 2 * g, 2 * size + 2 * g + 1
        t.h(A)
        t.h(B)
        t.cz(A, B)
        i, j, k = size + i, size + j, size + k
        t.cnot(k, j)
        t.cz(A, i)
        t.cz(B, j)
        gadgets.append((i, j, k, A, B))
    res = Phi2Resource(N, t, gadgets)
    if measure:
        out = []
        for g, (_, _, k, _, _) in enumerate(gadgets):
            forced = None if s0 is None else 1 - 2 * int(s0[g])
            v = t.measure(PauliString.from_sparse(n, {k: "X"}), rng, forced)
            out.append((1 - v) // 2)
        res.s0 = tuple(out)
    return res


def build_phi2(
    N: int, s0: Optional[Sequence[int]] = None, rng: Optional[np.random.Generator] = None
) -> Tuple[DenseState, Tuple[int, ...]]:
    """Dense inversion resource after the X measurements, order [D'][P][F].

    Measured qubits are dropped. Returns the state and the s0 record.
    """
    _require_dense(N)
    size = register_size(N, True)
    order = inversion_order(N)
    reg = LabeledState(DenseState.zero(0), [])
    for a in range(size):
        reg.append(bell_state(0, 0), [("Dp", a), ("Z", a)])
    rec = []
    for g, (i, j, k) in enumerate(order):
        A, B = ("P", 2 * g), ("P", 2 * g + 1)
        reg.append(bell_state(0, 0), [A, B])
        _gadget_unitary_part(reg, ("Z", i), ("Z", j), ("Z", k), A, B)
        bit, _ = reg.measure(("Z", k), "X", rng, None if s0 is None else int(s0[g]))
        rec.append(bit)
    labels = (
        [("Dp", a) for a in range(size)]
        + [("P", p) for p in range(2 * len(order))]
        + [("Z", q) for q in surviving_positions(N)]
    )
    return reg.ordered(labels), tuple(rec)


# --- assembled resource ----------------------------------------------------


@dataclass
class PhiResource:
    """Assembled query resource on 5N-3 qubits, order [I][L][P][F]."""

    N: int
    state: DenseState
    s0: Tuple[int, ...]
    layout: RegisterLayout
    mode: str
    outcomes: Dict[str, list] = field(default_factory=dict)


def build_phi(
    N: int,
    mode: str = "postselect",
    rng: Optional[np.random.Generator] = None,
    s0: Optional[Sequence[int]] = None,
) -> PhiResource:
    """Contract the teleportation resource with the inversion resource.

    The first N-1 positions of the encoding are Bell-measured against their
    partners; for the last N positions a CZ and an X measurement of the
    partner copy the partner's value into the pointer qubit, which becomes
    L. The inversion circuit then acts on the partner halves.

    ``postselect`` forces every outcome to +1 (and s0 to the given record, all
    zero by default). ``frame`` samples outcomes, tracks their byproducts as
    a Pauli frame and corrects the P and F qubits at the end. With ``s0``
    given, the zeroed-target outcomes are forced so that the frame-corrected
    record equals it.
    """
    if mode not in ("postselect", "frame"):
        raise ValueError(f"unknown mode {mode!r}")
    n = _require_dense(N)
    size = register_size(N, True)
    order = inversion_order(N)
    if s0 is not None and len(s0) != len(order):
        raise ValueError(f"s0 needs {len(order)} bits")
    if mode == "frame" and rng is None:
        raise ValueError("frame mode needs an rng")
    target = tuple(int(b) for b in s0) if s0 is not None else None
    post = mode == "postselect"

    reg = LabeledState(build_phi1(N), [("I", j) for j in range(n)] + [("D", a) for a in range(size)])
    frame = PauliFrame()
    outcomes: Dict[str, list] = {"bell": [], "copy": [], "s0_raw": []}
    for a in range(size):
        reg.append(bell_state(0, 0), [("Dp", a), ("Z", a)])
        if a < N - 1:
            (x, y), _ = reg.bell_measure(("D", a), ("Dp", a), rng, (0, 0) if post else None)
            outcomes["bell"].append((x, y))
            frame.add(("Z", a), x=y, z=x)
        else:
            reg.gate("CZ", ("D", a), ("Dp", a))
            c, _ = reg.measure(("Dp", a), "X", rng, 0 if post else None)
            outcomes["copy"].append(c)
            frame.add(("Z", a), x=c)
            reg.relabel({("D", a): ("L", a - (N - 1))})
    rec = []
    for g, (i, j, k) in enumerate(order):
        A, B = ("P", 2 * g), ("P", 2 * g + 1)
        zi, zj, zk = ("Z", i), ("Z", j), ("Z", k)
        reg.append(bell_state(0, 0), [A, B])
        _gadget_unitary_part(reg, zi, zj, zk, A, B)
        frame.cnot(zk, zj)
        frame.cz(A, zi)
        frame.cz(B, zj)
        flip = frame.drop(zk)[1]
        want = None
        if target is not None:
            want = target[g] ^ flip if not post else target[g]
        elif post:
            want = 0
        raw, _ = reg.measure(zk, "X", rng, want)
        outcomes["s0_raw"].append(raw)
        rec.append(raw if post else raw ^ flip)
    if not post:
        frame.apply(reg)
    labels = (
        [("I", j) for j in range(n)]
        + [("L", l) for l in range(N)]
        + [("P", p) for p in range(2 * len(order))]
        + [("Z", q) for q in surviving_positions(N)]
    )
    layout = RegisterLayout.for_size(N)
    return PhiResource(N, reg.ordered(labels), tuple(rec), layout, mode, outcomes)


def contract_phi(N: int, s0: Optional[Sequence[int]] = None) -> DenseState:
    """Direct contraction of the two resources, order [I][L][P][F].

    Sums (-1)^(j.k) over the encoding index j of the teleportation resource
    and the partner index k of the inversion resource, keeping the last N
    bits of j as the L register. Used as an independent check of
    :func:`build_phi`.
    """
    n = _require_dense(N)
    size = register_size(N, True)
    order = inversion_order(N)
    s0 = tuple(s0) if s0 is not None else (0,) * len(order)
    phi1 = build_phi1(N).amplitudes.reshape(1 << size, 1 << n)  # [j][i]
    phi2, _ = build_phi2(N, s0)
    rest = phi2.n - size
    phi2 = phi2.amplitudes.reshape(1 << rest, 1 << size)  # [rest][k]
    idx = np.arange(1 << size)
    parity = np.array([[bin(a & b).count("1") & 1 for b in idx] for a in idx])
    kernel = 1.0 - 2.0 * parity  # [j][k]
    phi2t = phi2 @ kernel.T  # [rest][j]
    low = N - 1
    out = np.zeros((1 << rest, 1 << N, 1 << n), dtype=complex)
    for jv in range(1 << size):
        out[:, jv >> low, :] += np.outer(phi2t[:, jv], phi1[jv, :])
    amps = out.reshape(-1)
    return DenseState.from_amplitudes(amps)


# --- query -----------------------------------------------------------------


@dataclass
class QueryTranscript:
    """Classical record of one query."""

    a: Tuple[int, ...]
    b: Tuple[int, ...]
    M: Tuple[int, ...]
    rounds: List[List[dict]]
    final_x: Tuple[int, ...]
    final_z: Tuple[int, ...]
    s0: Tuple[int, ...]

    @property
    def m(self) -> Tuple[int, ...]:
        return self.a + self.b

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "QueryTranscript":
        d = json.loads(text)
        for key in ("a", "b", "M", "final_x", "final_z", "s0"):
            d[key] = tuple(d[key])
        return cls(**d)


def run_query(
    psi: DenseState,
    D: Dataset | Sequence[int],
    phi: PhiResource,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[DenseState, QueryTranscript]:
    """Execute one query; returns the address-plus-bus state and its transcript."""
    N = phi.N
    n = log2_exact(N)
    if psi.n != n:
        raise ValueError(f"input needs {n} qubits")
    data = D.bits if isinstance(D, Dataset) else tuple(int(v) for v in D)
    if len(data) != N:
        raise ValueError("dataset size does not match the resource")
    if rng is None:
        raise ValueError("an rng is required")
    order = inversion_order(N)
    rounds = inversion_rounds(N)
    n_p = 2 * len(order)
    labels = (
        [("R", j) for j in range(n)]
        + [("I", j) for j in range(n)]
        + [("L", l) for l in range(N)]
        + [("P", p) for p in range(n_p)]
        + [("Z", q) for q in surviving_positions(N)]
    )
    reg = LabeledState(tensor(psi, phi.state), labels)
    a, b = [], []
    for j in range(n):
        (aj, bj), _ = reg.bell_measure(("R", j), ("I", j), rng)
        a.append(aj)
        b.append(bj)
    for g in adaptive_load(data, b):
        reg.gate("Z", ("L", g.qubits[0]))
    frame = PauliFrame()
    M = []
    for l in range(N):
        bit, _ = reg.measure(("L", l), "X", rng)
        M.append(bit)
        frame.add(("Z", N - 1 + l), z=bit)
    log: List[List[dict]] = []
    g = 0
    for r, gadgets in enumerate(rounds):
        entries = []
        for i, j, k in gadgets:
            zi, zj, zk = ("Z", i), ("Z", j), ("Z", k)
            frame.cnot(zk, zj)
            s0 = phi.s0[g] ^ frame.drop(zk)[1]
            rec = _measure_ancillas(reg, ("P", 2 * g), ("P", 2 * g + 1), s0, rng, None)
            ci, cj = rec.correction()
            frame.add(zi, z=ci)
            frame.add(zj, z=cj)
            entries.append({"gadget": [i, j, k], "s0": s0, "basis": rec.basis, "outcomes": list(rec.outcomes)})
            g += 1
        log.append(entries)
    fz = tuple(frame.get(("Z", q))[1] for q in surviving_positions(N))
    fx = tuple(frame.get(("Z", q))[0] for q in surviving_positions(N))
    frame.apply(reg)
    out = reg.ordered([("Z", q) for q in surviving_positions(N)])
    out = apply_gate(out, Gate("H", (n,)))
    for j in range(n):
        if b[j]:
            out = apply_gate(out, Gate("X", (j,)))
        if a[j]:
            out = apply_gate(out, Gate("Z", (j,)))
    transcript = QueryTranscript(tuple(a), tuple(b), tuple(M), log, fx, fz, tuple(phi.s0))
    return out, transcript


def ideal_output(psi: DenseState, D: Dataset | Sequence[int]) -> DenseState:
    """sum_x psi_x |x>|D_x>, bus as the top qubit."""
    data = D.bits if isinstance(D, Dataset) else tuple(int(v) for v in D)
    N = 1 << psi.n
    if len(data) != N:
        raise ValueError("dataset size does not match the input")
    amps = np.zeros(2 * N, dtype=complex)
    for x in range(N):
        amps[x + N * data[x]] = psi.amplitudes[x]
    return DenseState(psi.n + 1, amps)


def reference_query(psi: DenseState, D: Dataset | Sequence[int], bus: Optional[DenseState] = None) -> DenseState:
    """Apply V^{-1} W_D V to |psi>|bus> (bus |0> by default), dense for N <= 4.

    The ancilla part of the encoding register must return to |0>; the result
    is the address-plus-bus state.
    """
    data = D.bits if isinstance(D, Dataset) else tuple(int(v) for v in D)
    N = len(data)
    n = _require_dense(N)
    if psi.n != n:
        raise ValueError("input size does not match the dataset")
    size = register_size(N, True)
    s = tensor(tensor(psi, bus if bus is not None else DenseState.zero(1)), DenseState.zero(size - n - 1))
    s = apply_v(s, N)
    for l, bit in enumerate(data):
        if bit:
            s = apply_gate(s, Gate("Z", (N - 1 + l,)))
    s = apply_v_inverse(s, N)
    block = s.amplitudes.reshape(-1, 1 << (n + 1))
    leak = float(np.linalg.norm(block[1:]))
    if leak > 1e-9:
        raise RuntimeError(f"encoding register not returned to zero (leak {leak:.2e})")
    return DenseState(n + 1, block[0].copy())


def reference_query_basis(x: int, D: Dataset | Sequence[int], bus: int = 0) -> Tuple[int, int]:
    """Basis-state action by branch arithmetic: (x, bus) -> (x, bus XOR D_x).

    Propagates both bus branches of V through the encoding circuit as
    classical bitstrings, applies the phase from W_D, and maps back.
    """
    data = D.bits if isinstance(D, Dataset) else tuple(int(v) for v in D)
    N = len(data)
    n = log2_exact(N)
    gates = build_nohe_parallel(N, with_bus=True).gates
    size = register_size(N, True)
    amp = {}
    for branch in (0, 1):
        bits = [0] * size
        for j in range(n):
            bits[j] = (x >> j) & 1
        bits[n] = branch
        sign = -1 if (bus and branch) else 1
        for g in gates:
            _classical(bits, g)
        sign *= -1 if any(bits[N - 1 + l] and data[l] for l in range(N)) else 1
        for g in reversed(gates):
            _classical(bits, g)
        if any(bits[n + 1 :]) or any(bits[j] != (x >> j) & 1 for j in range(n)):
            raise RuntimeError("encoding did not return to the address")
        amp[branch] = sign
    # H on the bus maps the two-branch combination back to a basis state
    plus = amp[0] + amp[1]
    return x, 0 if abs(plus) > 0 else 1


def _classical(bits: List[int], g: Gate) -> None:
    q = g.qubits
    if g.kind == "SWAP":
        bits[q[0]], bits[q[1]] = bits[q[1]], bits[q[0]]
    elif g.kind == "FREDKIN":
        if bits[q[0]]:
            bits[q[1]], bits[q[2]] = bits[q[2]], bits[q[1]]
    else:
        raise ValueError(f"unexpected gate {g.kind}")
