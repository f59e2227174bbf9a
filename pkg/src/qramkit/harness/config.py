"""Run configuration: JSON file merged with command-line overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from ..factory import SCHEMES
from ..noiselab.fidelity import ESTIMATORS
from ..noiselab.layout import MAX_N, MODELS

COMMANDS = ("verify", "costs", "schedule", "simulate", "fidelity-scan", "haar-check", "factory")

_DEFAULT_NS = {
    "verify": (2, 4, 8, 16),
    "costs": (4, 8, 16, 32, 64, 128, 256, 512, 1024),
    "schedule": (8,),
    "simulate": (2,),
    "fidelity-scan": (8, 16, 32, 64, 128, 256, 512, 1024),
    "haar-check": (4, 8, 32),  # n = 1, 3, 8
    "factory": (8192,),
}


class ConfigError(ValueError):
    """Invalid run configuration; maps to exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    Ns: Tuple[int, ...] = ()
    models: Tuple[str, ...] = ("CD", "OP", "EC")
    epsilons: Tuple[float, ...] = (1e-4,)
    samples: int = 200
    datasets: int = 200
    estimator: str = "bound"
    scheme: str = "optimized"
    tau: float = 500e-6
    T: Optional[float] = 33e-6
    T0: float = 200e-6
    d0: float = 110e-6
    l: float = 3e-6
    seed: int = 0
    threads: int = 1
    out: Optional[str] = None
    haar_samples: int = 1_000_000
    ci: bool = False

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        Ns = self.Ns or _DEFAULT_NS[self.command]
        for N in Ns:
            if N < 2 or N & (N - 1):
                raise ConfigError(f"N={N} is not a power of two >= 2")
        if self.command == "fidelity-scan":
            if list(Ns) != sorted(set(Ns)):
                raise ConfigError("the N list must be strictly ascending")
            if max(Ns) > MAX_N:
                raise ConfigError(f"N is limited to {MAX_N}")
        if self.command == "simulate" and any(N not in (2, 4) for N in Ns):
            raise ConfigError("simulate runs dense queries at N = 2 or 4 only")
        if self.command == "factory" and min(Ns) < 4:
            raise ConfigError("the factory layout needs N >= 4")
        for m in self.models:
            if m not in MODELS:
                raise ConfigError(f"unknown model {m!r}")
        if any(not 0.0 <= e <= 1.0 for e in self.epsilons):
            raise ConfigError("epsilon must lie in [0, 1]")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.samples < 2 or self.datasets < 1 or self.threads < 1 or self.haar_samples < 2:
            raise ConfigError("need samples >= 2, datasets >= 1, threads >= 1")
        if min(self.tau, self.T0, self.d0, self.l) <= 0 or (self.T is not None and self.T <= 0):
            raise ConfigError("timing inputs must be positive")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return replace(self, Ns=tuple(Ns))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


_TUPLE_FIELDS = {"Ns": int, "models": str, "epsilons": float}


def load_config(path: Optional[str], command: str, overrides: Dict[str, Any]) -> RunConfig:
    """Read ``path`` (JSON object) if given, apply non-None overrides, validate."""
    data: Dict[str, Any] = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    seeded = "seed" in data or overrides.get("seed") is not None
    data.update({k: v for k, v in overrides.items() if v is not None})
    data["command"] = command
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, cast in _TUPLE_FIELDS.items():
        if key in data:
            v = data[key]
            data[key] = tuple(cast(x) for x in (v if isinstance(v, (list, tuple)) else [v]))
    if data.get("ci") and not seeded:
        raise ConfigError("a seed is mandatory in CI mode")
    try:
        cfg = RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()
