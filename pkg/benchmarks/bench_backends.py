"""Throughput comparison of the tick-kernel backends.

Runs the same competitive-network workload on each available backend and
reports wall time plus speedup.  Traces are also compared so a divergence
between implementations shows up here before it would confuse anyone.

Usage: python benchmarks/bench_backends.py [--duration-s 10]
"""

import argparse
import time

import numpy as np

from spikearm import backend
from spikearm.engine import run
from spikearm.events import merge_streams
from spikearm.generators import poisson_events
from spikearm.wta import WtaConfig, build_wta


def workload(duration_s: float):
    net = build_wta(WtaConfig())
    streams = []
    n_phases = max(1, int(duration_s))
    for i in range(n_phases):
        cluster = (i % 12) + 1
        streams.append(poisson_events(300.0, 1000.0 * duration_s / n_phases,
                                      seed=500 + i, line=cluster - 1,
                                      t_offset_us=int(i * duration_s / n_phases * 1e6)))
    return net, merge_streams(streams), int(duration_s * 1e6)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--duration-s", type=float, default=10.0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    net, stim, duration_us = workload(args.duration_s)
    n_ticks = duration_us // 100
    results = {}
    traces = {}
    for name in backend.available_backends():
        backend.kernel = backend.load_backend(name)
        run(net, stim, duration_us)  # warm-up
        best = np.inf
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            trace = run(net, stim, duration_us)
            best = min(best, time.perf_counter() - t0)
        results[name] = best
        traces[name] = trace
        print(f"{name:>3}: {best:8.3f} s for {n_ticks} ticks "
              f"({n_ticks / best / 1e3:8.1f} kticks/s, {len(trace.t_us)} spikes)")

    if len(traces) == 2:
        same = (np.array_equal(traces["c"].t_us, traces["py"].t_us)
                and np.array_equal(traces["c"].neuron_id, traces["py"].neuron_id))
        print(f"traces identical: {same}")
        print(f"speedup c over py: {results['py'] / results['c']:.1f}x")


if __name__ == "__main__":
    main()
