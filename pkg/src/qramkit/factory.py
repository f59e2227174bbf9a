"""Resource-state factory: trap geometry, atom rearrangement plan and timing.

Stations are labelled by sector K (0 .. logN-1), column C (0 .. K) and
station S (0 .. 2**C - 1). Each station has eight traps (x, y) on a 3x3 grid
with (1, 3) missing. Station (K, C, S) hosts the gadget that acts on target
sector J = K + 1 under control sector C, at pointer index bitrev_C(S), so a
parent station S has children 2S and 2S + 1.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from .circuit import build_nohe_parallel
from .encoding import log2_exact

TRAP_SLOTS = tuple((x, y) for y in (1, 2, 3) for x in (1, 2, 3) if (x, y) != (1, 3))
INITIAL_SLOTS = ((1, 1), (1, 2), (2, 1), (2, 2), (2, 3))
BOND_SLOTS = (((1, 1), (2, 1)), ((1, 2), (2, 2)))


@dataclass(frozen=True, order=True)
class TrapId:
    K: int
    C: int
    S: int
    x: int
    y: int

    def __post_init__(self) -> None:
        if self.K < 0 or not 0 <= self.C <= self.K or not 0 <= self.S < (1 << self.C):
            raise ValueError(f"invalid station labels {self}")
        if (self.x, self.y) not in TRAP_SLOTS:
            raise ValueError(f"invalid trap ({self.x}, {self.y})")

    @property
    def station(self) -> Tuple[int, int, int]:
        return (self.K, self.C, self.S)


def trap_coord(t: TrapId) -> Tuple[int, int]:
    """Integer grid coordinates: X = x + 3C + 3K(K+1)/2, Y = y + 3S."""
    return (t.x + 3 * t.C + 3 * t.K * (t.K + 1) // 2, t.y + 3 * t.S)


def _sectors(N: int) -> int:
    n = log2_exact(N)
    if N < 4:
        raise ValueError("the factory layout needs N >= 4")
    return n


def stations(N: int) -> Iterator[Tuple[int, int, int]]:
    for K in range(_sectors(N)):
        for C in range(K + 1):
            for S in range(1 << C):
                yield (K, C, S)


def station_count(N: int) -> int:
    """2N - logN - 2."""
    n = log2_exact(N)
    return 2 * N - n - 2


def all_traps(N: int) -> Iterator[TrapId]:
    for K, C, S in stations(N):
        for x, y in TRAP_SLOTS:
            yield TrapId(K, C, S, x, y)


@dataclass
class Occupancy:
    """Atom positions and Bell bonds; atoms are named by their starting trap."""

    N: int
    where: Dict[TrapId, TrapId]  # atom -> current trap
    bonds: List[Tuple[TrapId, TrapId]]  # pairs of atoms

    def occupied(self) -> Set[TrapId]:
        return set(self.where.values())

    @property
    def atoms(self) -> int:
        return len(self.where)

    def traps(self) -> int:
        return 8 * station_count(self.N)


def initial_occupancy(N: int) -> Occupancy:
    """Five atoms per station with two horizontal bonds; (2, 3) holds |0>."""
    where: Dict[TrapId, TrapId] = {}
    bonds: List[Tuple[TrapId, TrapId]] = []
    for K, C, S in stations(N):
        for x, y in INITIAL_SLOTS:
            t = TrapId(K, C, S, x, y)
            where[t] = t
        for a, b in BOND_SLOTS:
            bonds.append((TrapId(K, C, S, *a), TrapId(K, C, S, *b)))
    return Occupancy(N, where, bonds)


@dataclass(frozen=True)
class MoveLayer:
    moves: Tuple[Tuple[TrapId, TrapId], ...]

    def __len__(self) -> int:
        return len(self.moves)


def _merge_target(K: int, C: int, S: int) -> TrapId:
    # two children land on the same parent station, traps (3, 2) and (3, 3)
    return TrapId(K, C, S // 2, 3, 2 + (S % 2))


def plan_rearrangement(N: int) -> List[MoveLayer]:
    """The three parallel move layers that distribute the Bell pairs.

    1. Inside a sector: (K, C, S, 1, 2) -> (K, C-1, S//2, 3, 2 + S%2) for C > 0.
    2. Between sectors: (K, C, S, 1, 1) -> (K-1, C, S, 3, 1) for C < K.
    3. Between the last columns: (K, K, S, 1, 1) -> (K-1, K-1, S//2, 3, 2 + S%2)
       for K > 0.
    """
    _sectors(N)
    l1, l2, l3 = [], [], []
    for K, C, S in stations(N):
        if C > 0:
            l1.append((TrapId(K, C, S, 1, 2), _merge_target(K, C - 1, S)))
        if 0 < K and C < K:
            l2.append((TrapId(K, C, S, 1, 1), TrapId(K - 1, C, S, 3, 1)))
        if 0 < K and C == K:
            l3.append((TrapId(K, C, S, 1, 1), _merge_target(K - 1, K - 1, S)))
    return [MoveLayer(tuple(l1)), MoveLayer(tuple(l2)), MoveLayer(tuple(l3))]


def _monotone_map(pairs: Sequence[Tuple[int, int]]) -> bool:
    m: Dict[int, int] = {}
    for a, b in pairs:
        if m.setdefault(a, b) != b:
            return False
    keys = sorted(m)
    return all(m[keys[i]] < m[keys[i + 1]] for i in range(len(keys) - 1))


def validate_aod_layer(layer: MoveLayer, occupancy: Optional[Iterable[TrapId]] = None) -> bool:
    """Check one parallel transport step of a crossed-AOD grid.

    Start X values must map to target X values by a well-defined, strictly
    increasing function, and likewise for Y. Targets must be distinct. With
    ``occupancy`` (traps holding atoms before the step) every source must be
    occupied and every target empty once the moving atoms have left.
    """
    if not layer.moves:
        return True
    src = [trap_coord(a) for a, _ in layer.moves]
    dst = [trap_coord(b) for _, b in layer.moves]
    if len(set(src)) != len(src) or len(set(dst)) != len(dst):
        return False
    if not _monotone_map([(s[0], d[0]) for s, d in zip(src, dst)]):
        return False
    if not _monotone_map([(s[1], d[1]) for s, d in zip(src, dst)]):
        return False
    if occupancy is not None:
        occ = set(occupancy)
        sources = {a for a, _ in layer.moves}
        if not sources <= occ:
            return False
        staying = occ - sources
        if any(b in staying for _, b in layer.moves):
            return False
    return True


def ghost_pickups(layer: MoveLayer, occupancy: Iterable[TrapId]) -> List[TrapId]:
    """Occupied traps on a selected row and column that the layer does not move."""
    occ = set(occupancy)
    sources = {a for a, _ in layer.moves}
    xs = {trap_coord(a)[0] for a in sources}
    ys = {trap_coord(a)[1] for a in sources}
    return sorted(t for t in occ - sources if trap_coord(t)[0] in xs and trap_coord(t)[1] in ys)


def apply_layer(occ: Occupancy, layer: MoveLayer) -> Occupancy:
    by_trap = {t: atom for atom, t in occ.where.items()}
    where = dict(occ.where)
    for a, b in layer.moves:
        where[by_trap[a]] = b
    return Occupancy(occ.N, where, list(occ.bonds))


# --- nested bifurcation graph ---------------------------------------------

Vertex = Tuple[int, int, int]  # (J, K, a): gadget on target sector J under control sector K


@dataclass(frozen=True)
class NBGraph:
    N: int
    vertices: Tuple[Vertex, ...]
    edges: FrozenSet[Tuple[Vertex, Vertex]]  # (producer, consumer)

    def undirected(self) -> Set[FrozenSet[Vertex]]:
        return {frozenset(e) for e in self.edges}

    def tree_edges(self, J: int) -> List[Tuple[Vertex, Vertex]]:
        return [e for e in self.edges if e[0][0] == J and e[1][0] == J]


def build_nbg(N: int) -> NBGraph:
    """Gadgets of the with-bus schedule joined along the data flow of each qubit.

    An edge links consecutive gadgets that touch the same register qubit.
    """
    n = _sectors(N)
    circ = build_nohe_parallel(N, with_bus=True)
    last: Dict[int, Vertex] = {}
    verts: List[Vertex] = []
    edges: Set[Tuple[Vertex, Vertex]] = set()
    for layer in circ.layers:
        for g in layer:
            if g.kind != "FREDKIN":
                continue
            ctrl, b, _ = g.qubits
            K = (ctrl + 1).bit_length() - 1
            J = (b + 1).bit_length() - 1
            v = (J, K, ctrl - ((1 << K) - 1))
            verts.append(v)
            for q in g.qubits:
                if q in last:
                    edges.add((last[q], v))
            for q in g.qubits:
                last[q] = v
    if len(verts) != station_count(N) or max(v[0] for v in verts) != n:
        raise AssertionError("gadget count does not match the station count")
    return NBGraph(N, tuple(sorted(verts)), frozenset(edges))


def _bitrev(a: int, bits: int) -> int:
    r = 0
    for _ in range(bits):
        r = (r << 1) | (a & 1)
        a >>= 1
    return r


def station_vertex(K: int, C: int, S: int) -> Vertex:
    return (K + 1, C, _bitrev(S, C))


def replay_bonds(N: int, layers: Optional[Sequence[MoveLayer]] = None) -> Tuple[Occupancy, Set[FrozenSet[Vertex]]]:
    """Run the move layers and return the inter-station Bell bonds as NBG vertex pairs."""
    occ = initial_occupancy(N)
    for layer in layers if layers is not None else plan_rearrangement(N):
        if not validate_aod_layer(layer, occ.occupied()):
            raise ValueError("move layer violates AOD or occupancy constraints")
        occ = apply_layer(occ, layer)
    out: Set[FrozenSet[Vertex]] = set()
    for a, b in occ.bonds:
        sa, sb = occ.where[a].station, occ.where[b].station
        if sa != sb:
            out.add(frozenset((station_vertex(*sa), station_vertex(*sb))))
    return occ, out


def verify_bpd(N: int) -> bool:
    """The Bell-pair distribution after the three layers equals the NBG edge set."""
    _, bonds = replay_bonds(N)
    return bonds == build_nbg(N).undirected()


# --- timing ---------------------------------------------------------------

SCHEMES = ("linear", "optimized")


@dataclass(frozen=True)
class TimingReport:
    N: int
    scheme: str
    tau: float
    T: float
    T0: float
    d0: float
    l: float
    T_r: float
    T_m: float
    T_g: float
    T_Phi: float
    T_query: float
    rate: float
    rearrangement_fraction: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def move_time(d: float, T0: float = 200e-6, d0: float = 110e-6) -> float:
    """Transport time T0 sqrt(d / d0) over a distance d."""
    return T0 * math.sqrt(d / d0)


def timing_report(
    N: int,
    tau: float = 500e-6,
    T: Optional[float] = 33e-6,
    T0: float = 200e-6,
    d0: float = 110e-6,
    l: float = 3e-6,
    scheme: str = "optimized",
) -> TimingReport:
    """Factory and query times in seconds; rate in Hz.

    linear: three moves of at most 3Nl/2, T_r = 3 sqrt(3N/2) T.
    optimized: six moves of at most 3 sqrt(N) l / 2, T_r = 3 sqrt(6) T N^(1/4).
    T defaults to the measured 33 us; pass None for T0 sqrt(l / d0).
    """
    n = log2_exact(N)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if min(tau, T0, d0, l) <= 0 or (T is not None and T <= 0):
        raise ValueError("timing inputs must be positive")
    if T is None:
        T = move_time(l, T0, d0)
    if scheme == "linear":
        T_r = 3.0 * math.sqrt(1.5 * N) * T
    else:
        T_r = 3.0 * math.sqrt(6.0) * T * N**0.25
    T_m = 2.0 * tau * n
    T_g = 0.0
    T_phi = T_r + T_m + T_g
    return TimingReport(N, scheme, tau, T, T0, d0, l, T_r, T_m, T_g, T_phi, 2.0 * tau * n, 1.0 / T_phi, T_r / T_phi)


def max_move_distance(N: int) -> float:
    """Largest single displacement of the planned layers, in grid units."""
    best = 0.0
    for layer in plan_rearrangement(N):
        for a, b in layer.moves:
            (x0, y0), (x1, y1) = trap_coord(a), trap_coord(b)
            best = max(best, math.hypot(x1 - x0, y1 - y0))
    return best


# --- export ---------------------------------------------------------------

PLAN_COLUMNS = ("layer", "from_X", "from_Y", "to_X", "to_Y")


def plan_csv(layers: Sequence[MoveLayer]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLAN_COLUMNS)
    for i, layer in enumerate(layers, start=1):
        for a, b in layer.moves:
            w.writerow([i, *trap_coord(a), *trap_coord(b)])
    return buf.getvalue()
