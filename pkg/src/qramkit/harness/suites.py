"""Invariant suites run by ``qramkit verify``; each returns a JSON-ready result."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Sequence

import numpy as np

from ..circuit import (
    AnyCircuit,
    Gate,
    address_inputs,
    build_nohe_parallel,
    expand_gadgets,
    nohe_table,
    simulate_bits,
    verify_equivalence,
)
from ..cliffordlab import conjugation_identity_check, hierarchy_level, multi_controlled_z, verify_phi2_linear_graph
from ..densesim import DenseState, apply_gate, fidelity, haar_random_state, tensor
from ..noiselab import haar
from ..queryproto import (
    apply_v,
    build_phi,
    build_phi1,
    contract_phi,
    embed_address,
    gate_teleport,
    ideal_output,
    invert_nohe,
    run_query,
)


@dataclass
class SuiteResult:
    name: str
    ok: bool
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "ok": bool(self.ok), "detail": self.detail}


def _round(x: float) -> float:
    return float(f"{x:.12g}")


def claim1(Ns: Sequence[int], expander: Callable[[AnyCircuit], AnyCircuit] = expand_gadgets) -> SuiteResult:
    """Every circuit ordering maps |x, 0..0> to nohe(x)."""
    detail: Dict[str, Any] = {}
    ok = True
    for N in Ns:
        rep = verify_equivalence(N)
        got = simulate_bits(expander(build_nohe_parallel(N)), address_inputs(N))
        bad = int(np.count_nonzero((got != nohe_table(N)).any(axis=0)))
        good = rep.ok and bad == 0
        detail[str(N)] = "ok" if good else (rep.detail or f"{bad} addresses wrong after gadget expansion")
        ok &= good
    return SuiteResult("claim1", ok, detail)


def _pauli_on(psi: DenseState, a: Sequence[int], b: Sequence[int]) -> DenseState:
    for j, (aj, bj) in enumerate(zip(a, b)):
        if aj:
            psi = apply_gate(psi, Gate("Z", (j,)))
        if bj:
            psi = apply_gate(psi, Gate("X", (j,)))
    return psi


def gate_teleportation(Ns: Sequence[int], rng: np.random.Generator) -> SuiteResult:
    """Forced Bell outcomes give V X^b Z^a |psi, 0> for every (a, b)."""
    detail: Dict[str, Any] = {}
    ok = True
    for N in Ns:
        n = N.bit_length() - 1
        phi1 = build_phi1(N)
        psi = haar_random_state(n, rng)
        worst = 1.0
        for bits in itertools.product((0, 1), repeat=2 * n):
            a, b = bits[:n], bits[n:]
            _, out = gate_teleport(psi, phi1, forced=(a, b))
            ref = apply_v(embed_address(_pauli_on(psi, a, b), N), N)
            worst = min(worst, fidelity(out, ref))
        detail[str(N)] = _round(worst)
        ok &= worst >= 1 - 1e-10
    return SuiteResult("gate_teleportation", ok, detail)


def inversion(Ns: Sequence[int], rng: np.random.Generator, states: int = 5) -> SuiteResult:
    """Measurement-based inversion undoes V on random encoded states, in both modes."""
    detail: Dict[str, Any] = {}
    ok = True
    for N in Ns:
        n = N.bit_length() - 1
        worst = 1.0
        for _ in range(states):
            psi = haar_random_state(n + 1, rng)
            s = apply_v(tensor(psi, DenseState.zero(2 * N - 1 - n - 1)), N)
            for mode in ("adaptive", "frame"):
                out, _ = invert_nohe(s, N, rng, mode)
                worst = min(worst, fidelity(out, psi))
        detail[str(N)] = _round(worst)
        ok &= worst >= 1 - 1e-10
    return SuiteResult("inversion", ok, detail)


def resource(rng: np.random.Generator) -> SuiteResult:
    """Phi built by measurements equals the direct contraction (N = 2)."""
    ref = contract_phi(2)
    post = build_phi(2, "postselect").state
    frame = build_phi(2, "frame", rng, s0=(0,)).state
    f1, f2 = fidelity(post, ref), fidelity(frame, ref)
    return SuiteResult("resource", min(f1, f2) >= 1 - 1e-10, {"postselect": _round(f1), "frame": _round(f2)})


def query(rng: np.random.Generator, runs: int = 5) -> SuiteResult:
    """End-to-end query at N = 2 against sum_x psi_x |x, D_x>."""
    worst = 1.0
    for _ in range(runs):
        psi = haar_random_state(1, rng)
        D = tuple(int(v) for v in rng.integers(0, 2, size=2))
        phi = build_phi(2, "frame", rng)
        out, _ = run_query(psi, D, phi, rng)
        worst = min(worst, fidelity(out, ideal_output(psi, D)))
    return SuiteResult("query", worst >= 1 - 1e-8, {"2": _round(worst)})


def graph_state() -> SuiteResult:
    """N = 2 inversion resource: listed stabilizers and the post-H linear chain."""
    rep = verify_phi2_linear_graph()
    words = list(rep.pre_measurement)
    seven = all(rep.pre_measurement[w] == 1 for w in words[:7])
    return SuiteResult(
        "graph_state",
        seven and rep.ok,
        {"pre_measurement": rep.pre_measurement, "post_chain": rep.post_chain},
    )


def hierarchy() -> SuiteResult:
    levels = [hierarchy_level(multi_controlled_z(k)) for k in range(4)]
    conj = {str(N): conjugation_identity_check(N) for N in (2, 4)}
    return SuiteResult("hierarchy", levels == [0, 1, 2, 3] and all(conj.values()), {"levels": levels, "conjugation": conj})


def haar_moments(pairs: Sequence[tuple], rng: np.random.Generator, samples: int = 200_000) -> SuiteResult:
    """Flat-simplex sampling agrees with the closed forms within 5 standard errors."""
    detail: Dict[str, Any] = {}
    ok = True
    for n, N in pairs:
        z = haar.simplex_samples(N, samples, rng)
        s = z[:, :n].sum(axis=1)
        worst = 0.0
        for m in (1, 2, 3):
            for vals, want in ((z[:, 0] ** m, haar.moment_z(m, N)), (s**m, haar.moment_s(m, n, N))):
                se = vals.std(ddof=1) / np.sqrt(samples)
                worst = max(worst, abs(vals.mean() - want) / se)
        t = np.where(s > 0.5, s - 0.5, 0.0)
        worst = max(worst, abs(t.mean() - haar.threshold_integral(n, N)) / (t.std(ddof=1) / np.sqrt(samples) + 1e-300))
        lower_ok = haar.threshold_lower(n, N) <= t.mean()
        detail[f"{n},{N}"] = {"max_z_score": _round(worst), "threshold_lower_ok": bool(lower_ok)}
        ok &= worst < 5 and lower_ok
    return SuiteResult("haar_moments", ok, detail)


def run_all(Ns: Sequence[int], seed: int) -> List[SuiteResult]:
    """Every suite with a seed-derived generator each, in a fixed order."""
    seqs = np.random.SeedSequence(seed).spawn(5)
    rngs = [np.random.default_rng(s) for s in seqs]
    dense = [N for N in Ns if N in (2, 4)]
    return [
        claim1(Ns),
        gate_teleportation(dense or [2], rngs[0]),
        inversion(dense or [2], rngs[1]),
        resource(rngs[2]),
        query(rngs[3]),
        graph_state(),
        hierarchy(),
        haar_moments([(1, 4), (3, 8), (8, 32)], rngs[4]),
    ]
