"""Fidelity bounds, Monte Carlo estimation, first-order enumeration and scaling fits."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..encoding import log2_exact
from .branches import branch_propagate, compile_layout, good_set_sizes
from .haar import threshold_integral
from .layout import ErrorModel, event_count_probability, sample_error_config, single_event_configs

ESTIMATORS = ("bound", "s2", "threshold")


def fidelity_bound_pointwise(s: float) -> float:
    """(2s - 1)^2 when at least half the weight is queried coherently, else 0."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    return (2.0 * s - 1.0) ** 2 if s >= 0.5 else 0.0


def fidelity_bound_avg(g: int, N: int) -> float:
    """4 (g/N - 1/2)^2, clamped to 0 below g = N/2."""
    if not 0 <= g <= N:
        raise ValueError("need 0 <= g <= N")
    r = g / N - 0.5
    return 4.0 * r * r if r >= 0 else 0.0


def fidelity_s2(g: int, N: int) -> float:
    """<s^2> = g (g + 1) / (N (N + 1)), exact when the faulty part is orthogonal."""
    if not 0 <= g <= N:
        raise ValueError("need 0 <= g <= N")
    return g * (g + 1) / (N * (N + 1))


def fidelity_threshold(g: int, N: int) -> float:
    """4 <(s - 1/2) Theta(s - 1/2)>^2 evaluated exactly."""
    if g == 0:
        return 0.0
    return 4.0 * threshold_integral(g, N) ** 2


def _estimator_table(estimator: str, N: int) -> np.ndarray:
    f = {"bound": fidelity_bound_avg, "s2": fidelity_s2, "threshold": fidelity_threshold}.get(estimator)
    if f is None:
        raise ValueError(f"unknown estimator {estimator!r}")
    return np.array([f(g, N) for g in range(N + 1)])


@dataclass(frozen=True)
class FidelityEstimate:
    N: int
    model: str
    epsilon: float
    estimator: str
    samples: int
    datasets: int
    mean: float
    stderr: float
    seed: Optional[int]

    @property
    def infidelity(self) -> float:
        return 1.0 - self.mean

    def row(self) -> dict:
        return {
            "N": self.N,
            "model": self.model,
            "epsilon": self.epsilon,
            "estimator": self.estimator,
            "samples": self.samples,
            "datasets": self.datasets,
            "F_mean": self.mean,
            "F_stderr": self.stderr,
            "infidelity": self.infidelity,
            "seed": self.seed,
        }


CSV_COLUMNS = ("N", "model", "epsilon", "estimator", "samples", "datasets", "F_mean", "F_stderr", "infidelity", "seed")


def _worker(
    N: int,
    model: ErrorModel,
    count: int,
    n_datasets: int,
    table: np.ndarray,
    seq: np.random.SeedSequence,
    backend: Optional[str],
    conditioned: bool,
) -> np.ndarray:
    rng = np.random.default_rng(seq)
    comp = compile_layout(N)
    out = np.ones(count)
    for i in range(count):
        config = sample_error_config(model, comp.layout, rng, at_least_one=conditioned)
        datasets = rng.integers(0, 2, size=(n_datasets, N))
        if len(config) == 0:
            continue
        state = branch_propagate(comp, config, backend)
        out[i] = table[good_set_sizes(state, datasets)].mean()
    return out


def _partition(total: int, parts: int) -> List[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if w < extra else 0) for w in range(parts)]


def estimate_fidelity(
    N: int,
    model: ErrorModel | str,
    epsilon: Optional[float] = None,
    n_samples: int = 200,
    n_datasets: int = 200,
    estimator: str = "bound",
    seed: Optional[int] = None,
    workers: int = 1,
    backend: Optional[str] = None,
    conditioned: bool = True,
) -> FidelityEstimate:
    """Monte Carlo over error configurations, with fresh datasets for each one.

    Each configuration is propagated once and scored against ``n_datasets``
    random datasets. With ``conditioned`` (the default) configurations are
    drawn given at least one event and the infidelity is rescaled by the
    exact probability of that, which is unbiased and avoids wasting samples
    on error-free runs when epsilon is small. The samples are split into ``workers`` contiguous
    chunks, chunk w drawing from the w-th child of ``SeedSequence(seed)``, so
    the result depends only on (seed, workers).
    """
    log2_exact(N)
    if isinstance(model, str):
        if epsilon is None:
            raise ValueError("epsilon is required with a model name")
        model = ErrorModel(model, epsilon)
    if n_samples < 2 or n_datasets < 1 or workers < 1:
        raise ValueError("need n_samples >= 2, n_datasets >= 1, workers >= 1")
    table = _estimator_table(estimator, N)
    if model.epsilon == 0.0:
        conditioned = False
    weight = event_count_probability(model, compile_layout(N).layout) if conditioned else 1.0
    seqs = np.random.SeedSequence(seed).spawn(workers)
    counts = _partition(n_samples, workers)
    if workers == 1:
        parts = [_worker(N, model, counts[0], n_datasets, table, seqs[0], backend, conditioned)]
    else:
        compile_layout(N)
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_worker, N, model, c, n_datasets, table, s, backend, conditioned) for c, s in zip(counts, seqs)]
            parts = [f.result() for f in futs]
    loss = weight * (1.0 - np.concatenate(parts))
    return FidelityEstimate(
        N,
        model.kind,
        model.epsilon,
        estimator,
        n_samples,
        n_datasets,
        float(1.0 - loss.mean()),
        float(loss.std(ddof=1) / math.sqrt(len(loss))),
        seed,
    )


@dataclass(frozen=True)
class FirstOrder:
    """Linear-in-epsilon infidelity: 1 - F = slope * epsilon + O(epsilon^2)."""

    N: int
    model: str
    estimator: str
    slope: float
    events: int

    @property
    def dF_deps(self) -> float:
        return -self.slope


def enumerate_first_order(
    N: int,
    model: str,
    n_datasets: int = 64,
    estimator: str = "bound",
    seed: Optional[int] = 0,
    backend: Optional[str] = None,
) -> FirstOrder:
    """Sum of rate times infidelity over every single-event configuration."""
    if N > 1 << 9:
        raise ValueError("enumeration is limited to N <= 512")
    comp = compile_layout(N)
    table = _estimator_table(estimator, N)
    rng = np.random.default_rng(seed)
    datasets = rng.integers(0, 2, size=(n_datasets, N))
    em = ErrorModel(model, 1.0)
    total = 0.0
    count = 0
    for config in single_event_configs(em, comp.layout):
        state = branch_propagate(comp, config, backend)
        total += config.weight * (1.0 - table[good_set_sizes(state, datasets)].mean())
        count += 1
    return FirstOrder(N, model, estimator, total, count)


def fit_scaling(points: Iterable[Tuple[int, float]]) -> float:
    """Least-squares slope alpha of log(infidelity) against log(log2 N)."""
    pts = sorted((int(N), float(v)) for N, v in points)
    if len(pts) < 4:
        raise ValueError("need at least 4 points")
    if any(v <= 0 for _, v in pts):
        raise ValueError("infidelities must be positive")
    if len({N for N, _ in pts}) != len(pts):
        raise ValueError("N values must be distinct")
    x = np.log([math.log2(N) for N, _ in pts])
    y = np.log([v for _, v in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def scaling_sweep(
    Ns: Sequence[int],
    model: str,
    epsilon: float,
    n_samples: int,
    n_datasets: int,
    estimator: str = "bound",
    seed: int = 0,
    workers: int = 1,
) -> Tuple[List[FidelityEstimate], float]:
    ests = [
        estimate_fidelity(N, model, epsilon, n_samples, n_datasets, estimator, seed + i, workers)
        for i, N in enumerate(Ns)
    ]
    return ests, fit_scaling((e.N, e.infidelity) for e in ests)
