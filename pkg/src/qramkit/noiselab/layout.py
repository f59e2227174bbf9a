"""Space-time layout of a query and stochastic Pauli error configurations.

The layout is V^{-1} W_D V on the 2N-1 qubit encoding register: an H layer
on the bus, the swap layers, the gadget-expanded controlled-swap layers, a
load layer, and the mirror image. Errors are Pauli events placed after a
layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import binom

from ..circuit import Gate, LayeredCircuit, build_nohe_parallel, expand_gadgets, register_size
from ..encoding import log2_exact

MAX_N = 1 << 13
PAULI_CODES = {"X": 1, "Y": 2, "Z": 3}
PAULI_NAMES = {v: k for k, v in PAULI_CODES.items()}
MODELS = ("CD", "OP", "EC")


@dataclass(frozen=True)
class QueryLayout:
    """Layered query circuit with the data-dependent load layer left empty."""

    N: int
    circuit: LayeredCircuit
    load_layer: int
    alive_from: Tuple[int, ...]
    alive_until: Tuple[int, ...]

    @property
    def n(self) -> int:
        return log2_exact(self.N)

    @property
    def qubit_count(self) -> int:
        return self.circuit.qubit_count

    @property
    def depth(self) -> int:
        return self.circuit.depth

    @property
    def bus(self) -> int:
        return self.n

    @property
    def pointer_offset(self) -> int:
        """Qubit of pointer l is ``pointer_offset + l``."""
        return self.N - 1

    def alive(self, t: int) -> np.ndarray:
        a = np.asarray(self.alive_from)
        b = np.asarray(self.alive_until)
        return np.nonzero((a <= t) & (t <= b))[0]

    def alive_counts(self) -> np.ndarray:
        a = np.asarray(self.alive_from)[None, :]
        b = np.asarray(self.alive_until)[None, :]
        t = np.arange(self.depth)[:, None]
        return ((a <= t) & (t <= b)).sum(axis=1)

    def with_data(self, D: Sequence[int]) -> LayeredCircuit:
        """The full circuit with Z gates filling the load layer."""
        if len(D) != self.N:
            raise ValueError("dataset size does not match the layout")
        load = tuple(Gate("Z", (self.pointer_offset + l,)) for l, d in enumerate(D) if d)
        layers = list(self.circuit.layers)
        layers[self.load_layer] = load
        return LayeredCircuit(tuple(layers), self.qubit_count, self.circuit.alive_from)

    def gate_operands(self) -> List[Tuple[int, int]]:
        """(layer, qubit) for every operand of a multi-qubit gate."""
        out = []
        for t, layer in enumerate(self.circuit.layers):
            for g in layer:
                if len(g.qubits) > 1:
                    out.extend((t, q) for q in g.qubits)
        return out


def query_layout(N: int) -> QueryLayout:
    n = log2_exact(N)
    if N < 2 or N > MAX_N:
        raise ValueError(f"N must be in 2..{MAX_N}")
    size = register_size(N, True)
    v = expand_gadgets(build_nohe_parallel(N, with_bus=True))
    h = (Gate("H", (n,)),)
    forward = [h] + [tuple(layer) for layer in v.layers]
    layers = forward + [()] + [tuple(reversed(layer)) for layer in reversed(forward)]
    depth = len(layers)
    half = [0 if q <= n else 1 + v.alive_from[q] for q in range(size)]
    until = [depth - 1 - t for t in half]
    circuit = LayeredCircuit(tuple(layers), size, tuple(half))
    return QueryLayout(N, circuit, len(forward), tuple(half), tuple(until))


# --- error models ----------------------------------------------------------


@dataclass(frozen=True)
class ErrorModel:
    kind: str
    epsilon: float

    def __post_init__(self) -> None:
        if self.kind not in MODELS:
            raise ValueError(f"unknown model {self.kind!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")

    @property
    def event_probability(self) -> float:
        """Probability of a nontrivial Pauli at one location."""
        return self.epsilon if self.kind == "EC" else 0.75 * self.epsilon

    @property
    def paulis(self) -> Tuple[str, ...]:
        return ("Z",) if self.kind == "EC" else ("X", "Y", "Z")


@dataclass(frozen=True)
class ErrorConfig:
    """Pauli events ``(layer, qubit, pauli)`` sorted by layer, with weight p_k."""

    events: Tuple[Tuple[int, int, str], ...] = ()
    weight: float = 1.0

    def __post_init__(self) -> None:
        ev = tuple(sorted((int(t), int(q), str(p)) for t, q, p in self.events))
        for _, _, p in ev:
            if p not in PAULI_CODES:
                raise ValueError(f"bad Pauli {p!r}")
        object.__setattr__(self, "events", ev)

    def __len__(self) -> int:
        return len(self.events)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        t = np.array([e[0] for e in self.events], dtype=np.int32)
        q = np.array([e[1] for e in self.events], dtype=np.int32)
        p = np.array([PAULI_CODES[e[2]] for e in self.events], dtype=np.int8)
        return t, q, p


def locations(model: ErrorModel | str, layout: QueryLayout) -> List[Tuple[int, int]]:
    """All (layer, qubit) places where the model can insert an error."""
    kind = model.kind if isinstance(model, ErrorModel) else model
    if kind == "CD":
        return [(t, int(q)) for t in range(layout.depth) for q in layout.alive(t)]
    return layout.gate_operands()


def event_count_probability(model: ErrorModel, layout: QueryLayout) -> float:
    """Probability that a configuration holds at least one event."""
    p = model.event_probability
    V = len(_location_array(model.kind, layout))
    return float(-np.expm1(V * np.log1p(-p))) if p < 1.0 else 1.0


def sample_error_config(
    model: ErrorModel, layout: QueryLayout, rng: np.random.Generator, at_least_one: bool = False
) -> ErrorConfig:
    """Draw one error configuration; each location fails independently.

    With ``at_least_one`` the draw is conditioned on a nonempty configuration
    (the event count comes from the zero-truncated binomial).
    """
    p = model.event_probability
    if p == 0.0:
        if at_least_one:
            raise ValueError("cannot condition on an event when epsilon is 0")
        return ErrorConfig()
    locs = _location_array(model.kind, layout)
    if at_least_one:
        dist = binom(len(locs), p)
        u = rng.uniform(dist.cdf(0), 1.0)
        k = max(1, int(dist.ppf(u)))
    else:
        k = int(rng.binomial(len(locs), p))
    if k == 0:
        return ErrorConfig()
    picks = rng.choice(len(locs), size=k, replace=False)
    names = model.paulis
    events = []
    for idx in picks:
        t, q = locs[idx]
        events.append((int(t), int(q), names[int(rng.integers(len(names)))]))
    return ErrorConfig(tuple(events))


_LOC_CACHE: dict = {}


def _location_array(kind: str, layout: QueryLayout) -> np.ndarray:
    key = (kind if kind == "CD" else "gate", layout.N)
    if key not in _LOC_CACHE:
        _LOC_CACHE[key] = np.array(locations(kind, layout), dtype=np.int64).reshape(-1, 2)
    return _LOC_CACHE[key]


def single_event_configs(model: ErrorModel, layout: QueryLayout) -> Iterator[ErrorConfig]:
    """Every one-event configuration, weighted by its first-order rate per unit epsilon."""
    per = 1.0 if model.kind == "EC" else 0.25
    for t, q in locations(model, layout):
        for p in model.paulis:
            yield ErrorConfig(((t, q, p),), per)
