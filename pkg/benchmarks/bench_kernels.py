#!/usr/bin/env python3
"""Benchmark of the probe-sampling kernel: pure Python vs compiled.

The kernel dominates runtime once probe grids get dense (small probe
interval, long horizon, jitter on), which is exactly the regime batch
experiments run in. The event loop around it is plain Python either
way, so full-run speedups are smaller than raw kernel speedups; both
numbers are reported.

Usage: python benchmarks/bench_kernels.py [--probes N] [--repeats K]
"""

from __future__ import annotations

import argparse
import json
import time

import nmpsim.kernels as kernels
from nmpsim import engine
from nmpsim.kernels import pure
from nmpsim.scenario import load_bundled_scenario, parse_scenario, serialize_scenario

try:
    from nmpsim.kernels import _native
except ImportError:
    _native = None


def best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernel(n_probes: int, repeats: int) -> None:
    starts = [i * 1000.0 for i in range(200)]
    values = [5.0 + (i % 17) * 0.25 for i in range(200)]
    times = [i * 0.5 for i in range(n_probes)]

    print(f"kernel sweep: {n_probes} probes over a 200-segment schedule")
    for std, label in ((0.0, "no jitter"), (0.5, "jitter on")):
        t_pure = best_of(lambda: pure.sweep_delays(starts, values, times, std, 42, 99), repeats)
        line = f"  {label:10s} pure {t_pure * 1000:9.1f} ms"
        if _native is not None:
            t_native = best_of(
                lambda: _native.sweep_delays(starts, values, times, std, 42, 99), repeats
            )
            line += f"   native {t_native * 1000:8.1f} ms   speedup {t_pure / t_native:6.1f}x"
        print(line)


def stress_scenario():
    """Dense-probe variant of the bundled ramp (10 ms probe period)."""
    doc = json.loads(serialize_scenario(load_bundled_scenario("congestion-ramp")))
    doc["probe"]["interval_ms"] = 10.0
    for path in doc["topology"]["paths"]:
        path["jitter_std_ms"] = 0.05
    return parse_scenario(json.dumps(doc))


def bench_engine(repeats: int) -> None:
    scenario = stress_scenario()
    n_probes = int(scenario.duration_ms / scenario.probe.interval_ms + 1)
    print(f"full run: {len(scenario.topology.paths)} paths x {n_probes} probes each")

    def with_backend(impl):
        original = kernels.sweep_delays
        kernels.sweep_delays = impl.sweep_delays
        try:
            return best_of(lambda: engine.run(scenario), repeats)
        finally:
            kernels.sweep_delays = original

    t_pure = with_backend(pure)
    line = f"  engine      pure {t_pure * 1000:9.1f} ms"
    if _native is not None:
        t_native = with_backend(_native)
        line += f"   native {t_native * 1000:8.1f} ms   speedup {t_pure / t_native:6.1f}x"
    print(line)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--probes", type=int, default=1_000_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    if _native is None:
        print("compiled kernel not built; showing pure backend only")
    bench_kernel(args.probes, args.repeats)
    bench_engine(args.repeats)


if __name__ == "__main__":
    main()
