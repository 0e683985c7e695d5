#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot paths (price simulation, reward accumulation, wealth
accumulation) on the benth2012 preset for each backend and reports the
speedup plus a cross-backend agreement check.  JIT compilation is paid
outside the timed region.

Usage::

    python3 benchmarks/bench_backends.py [--paths N] [--steps N]
                                         [--repeats N] [--seed N]
"""

import argparse
import time

import numpy as np

from levyou import presets, valuation
from levyou._backend import available_backends
from levyou.market import SimConfig, simulate_paths


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=20_000)
    parser.add_argument("--steps", type=int, default=96)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=20120808)
    args = parser.parse_args()

    preset = presets.get_preset("benth2012")
    market = preset.market
    cfg = SimConfig(n_paths=args.paths, n_steps=args.steps, seed=args.seed)
    t, s, T = 0.0, preset.s0, preset.horizon
    table = valuation.strategy_table(
        market, "exact", np.linspace(t, T, args.steps + 1),
        preset.pi_min, preset.pi_max,
    )

    backends = available_backends()
    print(f"backends: {', '.join(backends)}  "
          f"paths={args.paths} steps={args.steps} repeats={args.repeats}")

    tasks = {
        "price paths": lambda be: simulate_paths(
            market, t, s, T, cfg, backend=be
        ).prices,
        "reward estimate": lambda be: valuation.estimate_value(
            market, t, s, T, preset.pi_min, preset.pi_max,
            config=cfg, backend=be,
        ).g_hat,
        "wealth paths": lambda be: valuation.wealth_simulate(
            market, table, t, s, 1.0, T, config=cfg, backend=be,
        ).terminal_log_wealth,
    }

    for label, task in tasks.items():
        results = {}
        timings = {}
        for be in backends:
            task(be)  # warm-up: JIT compile / cache load
            timings[be] = best_of(args.repeats, lambda be=be: task(be))
            results[be] = np.asarray(task(be))
        line = f"{label:16s}"
        for be in backends:
            rate = args.paths / timings[be]
            line += f"  {be}: {timings[be] * 1e3:8.1f} ms ({rate:9.0f} paths/s)"
        if len(backends) == 2:
            a, b = (results[be] for be in backends)
            agree = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-30)))
            line += (f"  speedup x{timings[backends[1]] / timings[backends[0]]:.1f}"
                     f"  max rel diff {agree:.2e}")
        print(line)


if __name__ == "__main__":
    main()
