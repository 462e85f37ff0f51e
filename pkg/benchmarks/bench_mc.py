"""Compiled kernel vs numpy fallback on the path simulator.

    python benchmarks/bench_mc.py [--paths 8192] [--steps 500] [--repeat 3]
"""

import argparse
import time

import numpy as np

from occpricer import montecarlo as mc
from occpricer.model import kou, risk_neutral
from occpricer.montecarlo import _fallback


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=mc.CHUNK)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    params = risk_neutral(kou(0.0, 0.3, 1.0, 0.5, 5.0, 4.0), 0.05)
    tables = mc.jump_tables(params)
    T = np.ones(args.paths)
    grid_args = (T, float(args.steps), params.mu, params.sigma, params.lam, params.p_up, tables,
                 -0.05, 0.05, 0.5, False)
    fp_args = (args.paths, 0.0, 1.0, -0.1, 0.1, 1e-3, params.mu, params.sigma, params.lam, params.p_up, tables)

    backends = [("fallback", _fallback)]
    if mc.BACKEND == "cython":
        backends.insert(0, ("cython", mc._backend))
    else:
        print("compiled kernel not available; timing the fallback only")

    work = args.paths * args.steps
    print(f"{'backend':<10}{'kernel':<14}{'seconds':>10}{'ns/path-step':>15}")
    results = {}
    for name, mod in backends:
        t = _time(lambda: mod.simulate_grid(np.random.Philox(key=1), *grid_args), args.repeat)
        results[name, "grid"] = t
        print(f"{name:<10}{'grid':<14}{t:>10.3f}{1e9 * t / work:>15.1f}")
        t = _time(lambda: mod.first_passage(np.random.Philox(key=1), *fp_args), args.repeat)
        results[name, "first-passage"] = t
        print(f"{name:<10}{'first-passage':<14}{t:>10.3f}{'':>15}")
    if len(backends) == 2:
        for k in ("grid", "first-passage"):
            print(f"speed-up {k}: {results['fallback', k] / results['cython', k]:.1f}x")


if __name__ == "__main__":
    main()
