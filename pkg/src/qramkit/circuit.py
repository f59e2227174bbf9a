"""Gate IR and builders for the nested one-hot encoding circuit.

Qubits of the encoding register are labelled ``0 .. 2**n - 2`` where ``n`` is
the number of encoded address bits; sector ``K`` occupies qubits
``2**K - 1 .. 2**(K+1) - 2``. On input, address bit ``x_K`` sits on qubit ``K``
and every other qubit is |0>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from .encoding import log2_exact, mu_inv, nohe

ARITY = {"X": 1, "Z": 1, "H": 1, "CZ": 2, "CNOT": 2, "SWAP": 2, "TOFFOLI": 3, "FREDKIN": 3}
CLIFFORD_KINDS = frozenset({"X", "Z", "H", "CZ", "CNOT", "SWAP"})


@dataclass(frozen=True)
class Gate:
    """A gate with controls listed before targets.

    ``FREDKIN(a, b, c)`` swaps b and c when a is set; ``TOFFOLI(a, b, c)``
    flips c when a and b are set; ``CNOT(c, t)`` flips t when c is set.
    """

    kind: str
    qubits: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qs = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qs)
        if len(qs) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {ARITY[self.kind]} operands, got {len(qs)}")
        if len(set(qs)) != len(qs):
            raise ValueError(f"repeated operand in {self.kind}{qs}")
        if min(qs) < 0:
            raise ValueError("negative qubit index")

    def __str__(self) -> str:
        return " ".join([self.kind, *map(str, self.qubits)])


def fredkin(a: int, b: int, c: int) -> Gate:
    return Gate("FREDKIN", (a, b, c))


@dataclass(frozen=True)
class Circuit:
    """A plain gate sequence, first gate applied first."""

    gates: Tuple[Gate, ...]
    qubit_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        _check_range(self.gates, self.qubit_count)


@dataclass(frozen=True)
class LayeredCircuit:
    """Gates grouped into parallel layers; no qubit is used twice in a layer.

    ``alive_from[q]`` is the first layer at which qubit q holds data: 0 for
    input qubits, otherwise the first layer that touches it.
    """

    layers: Tuple[Tuple[Gate, ...], ...]
    qubit_count: int
    alive_from: Tuple[int, ...] = field(default=())
    swap_layers: int = 0

    def __post_init__(self) -> None:
        layers = tuple(tuple(layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        for t, layer in enumerate(layers):
            _check_range(layer, self.qubit_count)
            used: set = set()
            for g in layer:
                if used.intersection(g.qubits):
                    raise ValueError(f"layer {t} reuses a qubit: {g}")
                used.update(g.qubits)
        if not self.alive_from:
            object.__setattr__(self, "alive_from", tuple([0] * self.qubit_count))

    @property
    def gates(self) -> Tuple[Gate, ...]:
        return tuple(g for layer in self.layers for g in layer)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def flatten(self) -> Circuit:
        return Circuit(self.gates, self.qubit_count)


AnyCircuit = Union[Circuit, LayeredCircuit]


@dataclass(frozen=True)
class CostReport:
    toffoli_count: int
    t_count: int
    cs_layer_depth: int
    total_depth: int
    gate_total: int
    toffoli_closed_form: int


def _check_range(gates: Iterable[Gate], n: int) -> None:
    for g in gates:
        if max(g.qubits) >= n:
            raise ValueError(f"{g} exceeds register of {n} qubits")


# --- builders -------------------------------------------------------------


def _encoded_bits(N: int, with_bus: bool) -> int:
    n = log2_exact(N)
    if N < 2:
        raise ValueError("N must be at least 2")
    return n + 1 if with_bus else n


def register_size(N: int, with_bus: bool) -> int:
    """Qubits of the encoding register: N-1, or 2N-1 with the bus sector."""
    return (1 << _encoded_bits(N, with_bus)) - 1


def bus_input_qubit(N: int) -> int:
    """Input position of the bus, treated as the top address bit."""
    return log2_exact(N)


def cs_bar(K: int, J: int) -> List[Gate]:
    """The 2**K controlled swaps moving sector-J content under sector-K control."""
    if not 0 <= K < J:
        raise ValueError("need 0 <= K < J")
    lo = (1 << K) - 1
    return [fredkin(a, a + (1 << J) - (1 << K), a + (1 << J)) for a in range(lo, 2 * lo + 1)]


def _swaps(s_max: int) -> List[Gate]:
    # x_K moves from qubit K to 2**K - 1. Taking K in descending order keeps
    # qubit K free of data when the later, smaller K lands there.
    return [Gate("SWAP", (K, (1 << K) - 1)) for K in range(s_max, 1, -1)]


def build_nohe_sequential(N: int, with_bus: bool = False) -> Circuit:
    """Swaps, then CS-bar(K|J) blocks with K outer and J inner."""
    n = _encoded_bits(N, with_bus)
    s_max = n - 1
    gates = _swaps(s_max)
    for K in range(s_max):
        for J in range(K + 1, s_max + 1):
            gates.extend(cs_bar(K, J))
    return Circuit(tuple(gates), (1 << n) - 1)


def _asap_layers(gates: Sequence[Gate]) -> List[List[Gate]]:
    """Schedule gates in order, each as early as its operands allow."""
    ready: dict = {}
    layers: List[List[Gate]] = []
    for g in gates:
        t = max((ready.get(q, 0) for q in g.qubits), default=0)
        if t == len(layers):
            layers.append([])
        layers[t].append(g)
        for q in g.qubits:
            ready[q] = t + 1
    return layers


def cs_layer_pairs(s_max: int) -> List[List[Tuple[int, int]]]:
    """(K, J) blocks per parallel step: K + J = T for T = 1 .. 2*s_max - 1."""
    out = []
    for T in range(1, 2 * s_max):
        out.append([(K, T - K) for K in range(max(0, T - s_max), (T - 1) // 2 + 1)])
    return out


def _alive_from(layers: Sequence[Sequence[Gate]], n_qubits: int, inputs: Iterable[int]) -> Tuple[int, ...]:
    alive = [len(layers)] * n_qubits
    for q in inputs:
        alive[q] = 0
    for t, layer in enumerate(layers):
        for g in layer:
            for q in g.qubits:
                alive[q] = min(alive[q], t)
    return tuple(alive)


def build_nohe_parallel(N: int, with_bus: bool = False) -> LayeredCircuit:
    """Swap stage followed by 2*s_max - 1 qubit-disjoint CS layers."""
    n = _encoded_bits(N, with_bus)
    s_max = n - 1
    swap_layers = _asap_layers(_swaps(s_max))
    layers = [list(l) for l in swap_layers]
    for pairs in cs_layer_pairs(s_max):
        layer: List[Gate] = []
        for K, J in pairs:
            layer.extend(cs_bar(K, J))
        layers.append(layer)
    size = (1 << n) - 1
    return LayeredCircuit(
        tuple(tuple(l) for l in layers), size, _alive_from(layers, size, range(n)), len(swap_layers)
    )


def _expand_gate(g: Gate) -> List[Gate]:
    if g.kind != "FREDKIN":
        return [g]
    a, b, c = g.qubits
    return [Gate("TOFFOLI", (a, b, c)), Gate("CNOT", (c, b))]


def expand_gadgets(c: AnyCircuit) -> AnyCircuit:
    """Replace each CS(a|b,c) by TOFFOLI(a,b;c) then CNOT(c;b).

    Valid whenever the second target c is |0> before the gate. Layers with
    controlled swaps split into a Toffoli sublayer and a CNOT sublayer.
    """
    if isinstance(c, Circuit):
        return Circuit(tuple(h for g in c.gates for h in _expand_gate(g)), c.qubit_count)
    layers: List[Tuple[Gate, ...]] = []
    n_swap = 0
    for t, layer in enumerate(c.layers):
        if any(g.kind == "FREDKIN" for g in layer):
            first = [_expand_gate(g)[0] for g in layer]
            second = [_expand_gate(g)[1] for g in layer if g.kind == "FREDKIN"]
            layers.extend([tuple(first), tuple(second)])
        else:
            layers.append(layer)
            if t < c.swap_layers:
                n_swap += 1
    inputs = [q for q in range(c.qubit_count) if c.alive_from[q] == 0]
    return LayeredCircuit(tuple(layers), c.qubit_count, _alive_from(layers, c.qubit_count, inputs), n_swap)


def inverse(c: AnyCircuit) -> AnyCircuit:
    """Gate-reversed circuit; every gate in the IR is self-inverse."""
    if isinstance(c, Circuit):
        return Circuit(tuple(reversed(c.gates)), c.qubit_count)
    layers = tuple(tuple(layer) for layer in reversed(c.layers))
    return LayeredCircuit(layers, c.qubit_count, _alive_from(layers, c.qubit_count, range(c.qubit_count)))


def toffoli_closed_form(N: int, with_bus: bool = False) -> int:
    n = log2_exact(N)
    return 2 * N - n - 2 if with_bus else N - n - 1


def count_costs(N: int, with_bus: bool = False) -> CostReport:
    par = build_nohe_parallel(N, with_bus)
    expanded = expand_gadgets(par)
    tof = sum(1 for g in expanded.gates if g.kind == "TOFFOLI")
    cs_depth = par.depth - par.swap_layers
    return CostReport(
        toffoli_count=tof,
        t_count=4 * tof,
        cs_layer_depth=cs_depth,
        total_depth=par.depth,
        gate_total=len(expanded.gates),
        toffoli_closed_form=toffoli_closed_form(N, with_bus),
    )


# --- classical simulation -------------------------------------------------


def simulate_bits(c: AnyCircuit, inputs: np.ndarray) -> np.ndarray:
    """Run basis states through a reversible circuit.

    ``inputs`` has shape (qubit_count, batch) of booleans; returns the outputs
    in the same layout. Z and CZ only add phases and are skipped; H is
    rejected.
    """
    bits = np.array(inputs, dtype=bool, copy=True)
    if bits.ndim == 1:
        bits = bits[:, None]
    if bits.shape[0] != c.qubit_count:
        raise ValueError("input height must equal qubit_count")
    for g in c.gates:
        q = g.qubits
        k = g.kind
        if k == "X":
            bits[q[0]] ^= True
        elif k == "CNOT":
            bits[q[1]] ^= bits[q[0]]
        elif k == "TOFFOLI":
            bits[q[2]] ^= bits[q[0]] & bits[q[1]]
        elif k == "SWAP":
            bits[[q[0], q[1]]] = bits[[q[1], q[0]]]
        elif k == "FREDKIN":
            m = bits[q[0]] & (bits[q[1]] ^ bits[q[2]])
            bits[q[1]] ^= m
            bits[q[2]] ^= m
        elif k == "H":
            raise ValueError("H is not a classical reversible gate")
    return bits


def address_inputs(N: int, with_bus: bool = False) -> np.ndarray:
    """All |x, 0...0> inputs (bus bit 0) as a (qubits, N) boolean array."""
    n = log2_exact(N)
    size = register_size(N, with_bus)
    out = np.zeros((size, N), dtype=bool)
    for x in range(N):
        for j in range(n):
            out[j, x] = (x >> j) & 1
    return out


def nohe_table(N: int) -> np.ndarray:
    """nohe(x) for every address, as a (N-1, N) boolean array."""
    n = log2_exact(N)
    out = np.zeros((N - 1, N), dtype=bool)
    for x in range(N):
        out[:, x] = nohe(mu_inv(x, n)).bits
    return out


@dataclass(frozen=True)
class EquivalenceReport:
    N: int
    ok: bool
    inputs_checked: int
    detail: str = ""


def verify_equivalence(N: int, all_inputs: bool = False) -> EquivalenceReport:
    """Check sequential, parallel and expanded circuits against nohe(x).

    With ``all_inputs`` (N <= 16) the sequential and parallel circuits are
    also compared on every basis input, valid or not.
    """
    seq = build_nohe_sequential(N)
    par = build_nohe_parallel(N)
    exp_seq = expand_gadgets(seq)
    exp_par = expand_gadgets(par)
    inputs = address_inputs(N)
    want = nohe_table(N)
    for name, circ in (("sequential", seq), ("parallel", par), ("expanded", exp_seq), ("expanded-parallel", exp_par)):
        got = simulate_bits(circ, inputs)
        bad = np.nonzero((got != want).any(axis=0))[0]
        if bad.size:
            return EquivalenceReport(N, False, N, f"{name} differs from nohe at x={int(bad[0])}")
    checked = N
    if all_inputs:
        if N > 16:
            raise ValueError("all-input mode is limited to N <= 16")
        size = seq.qubit_count
        idx = np.arange(1 << size)
        every = ((idx[None, :] >> np.arange(size)[:, None]) & 1).astype(bool)
        a = simulate_bits(seq, every)
        b = simulate_bits(par, every)
        bad = np.nonzero((a != b).any(axis=0))[0]
        if bad.size:
            return EquivalenceReport(N, False, 1 << size, f"orderings differ on input {int(bad[0])}")
        checked = 1 << size
    return EquivalenceReport(N, True, checked)


# --- text export ----------------------------------------------------------


def to_text(c: AnyCircuit) -> str:
    """One gate per line; layers separated by ``---``."""
    if isinstance(c, Circuit):
        return "\n".join(map(str, c.gates)) + "\n"
    return "\n---\n".join("\n".join(map(str, layer)) for layer in c.layers) + "\n"


def from_text(text: str, qubit_count: int) -> AnyCircuit:
    layered = any(line.strip() == "---" for line in text.splitlines())
    layers: List[List[Gate]] = [[]]
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line == "---":
            layers.append([])
            continue
        kind, *ops = line.split()
        layers[-1].append(Gate(kind, tuple(int(o) for o in ops)))
    if layered:
        return LayeredCircuit(tuple(tuple(l) for l in layers), qubit_count)
    return Circuit(tuple(layers[0]), qubit_count)
