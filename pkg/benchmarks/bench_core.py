"""Compare the compiled and numpy branch-propagation kernels.

Usage: python benchmarks/bench_core.py [--N 64,256,1024,4096] [--configs 20] [--model CD] [--epsilon 1e-4]

Both kernels run on identical error configurations; outputs are checked for
equality before timings are reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qramkit.noiselab.branches import _HAVE_CORE, branch_propagate, compile_layout
from qramkit.noiselab.layout import ErrorModel, sample_error_config


def _time(comp, configs, backend: str) -> tuple:
    t0 = time.perf_counter()
    out = [branch_propagate(comp, c, backend) for c in configs]
    return time.perf_counter() - t0, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", default="64,256,1024,4096")
    ap.add_argument("--configs", type=int, default=20)
    ap.add_argument("--model", default="CD")
    ap.add_argument("--epsilon", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _HAVE_CORE:
        raise SystemExit("compiled kernel not built; run pip install -e . --no-build-isolation")
    rng = np.random.default_rng(args.seed)
    model = ErrorModel(args.model, args.epsilon)
    print(f"{'N':>6} {'events/cfg':>10} {'cython ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for N in (int(v) for v in args.N.split(",")):
        comp = compile_layout(N)
        configs = [sample_error_config(model, comp.layout, rng, at_least_one=True) for _ in range(args.configs)]
        _time(comp, configs[:1], "cython")
        _time(comp, configs[:1], "numpy")
        tc, oc = _time(comp, configs, "cython")
        tn, on = _time(comp, configs, "numpy")
        for a, b in zip(oc, on):
            same = (
                np.array_equal(a.addr, b.addr)
                and np.array_equal(a.bus, b.bus)
                and np.array_equal(a.hash, b.hash)
                and np.array_equal(a.phase, b.phase)
                and (a.load != b.load).nnz == 0
            )
            if not same:
                raise SystemExit(f"kernels disagree at N={N}")
        events = np.mean([len(c) for c in configs])
        k = len(configs)
        print(f"{N:>6} {events:>10.1f} {1e3 * tc / k:>10.3f} {1e3 * tn / k:>10.3f} {tn / tc:>7.1f}x")


if __name__ == "__main__":
    main()
