#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-Python fallback.

Times the training replay (the optimizer's hot loop) and a full training run
on both backends, verifies the outputs agree bit for bit, and prints the
speedups.  Usage::

    python benchmarks/bench_kernels.py [--points 600] [--rules 40] [--iterations 400]
"""

import argparse
import time

import numpy as np

from it2garch.garch import GarchParams, simulate_garch
from it2garch.kernels import available_backends
from it2garch.model import ModelConfig, train


def time_call(fn, min_seconds=0.3):
    fn()  # warm up
    reps = 0
    started = time.perf_counter()
    while True:
        fn()
        reps += 1
        elapsed = time.perf_counter() - started
        if elapsed >= min_seconds and reps >= 3:
            return elapsed / reps


def bench_replay(backends, n_points, n_rules, window=5, sets=3):
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.normal(0.0, 1.0, n_points))
    centers = np.ascontiguousarray(
        [x[i:i + window].mean() for i in range(n_points - window)])
    ant = np.ascontiguousarray(rng.integers(0, sets, (n_rules, window)),
                               dtype=np.int64)
    coeffs = np.ascontiguousarray(rng.normal(0.0, 1.0, (n_rules, window + 1)))
    args = (x, window, sets, centers, ant, coeffs, 0.05, 0.3, 0.6,
            0.00098206911707166, 5.02388618731311, 1e-8, 0.3, 0.2)

    outputs = {}
    timings = {}
    for name, ker in backends.items():
        outputs[name] = ker.replay_train(*args)
        timings[name] = time_call(lambda k=ker: k.replay_train(*args))
    if len(outputs) == 2:
        a, b = outputs["python"], outputs["compiled"]
        assert np.array_equal(a[0], b[0]) and a[1:] == b[1:], \
            "backends disagree on the replay output"
        print("replay outputs bit-identical across backends: OK")
    return timings


def bench_train(n_points, iterations):
    from it2garch.kernels import backend_name, use_backend

    series = simulate_garch(GarchParams(0.05, 0.3, 0.6), 10.0, n_points, seed=1)
    cfg = ModelConfig(window=5, steps=3, iterations=iterations, seed=1)
    timings = {}
    models = {}
    saved = backend_name()
    try:
        for name in available_backends():
            use_backend(name)
            started = time.perf_counter()
            models[name] = train(series, cfg)
            timings[name] = time.perf_counter() - started
    finally:
        use_backend(saved)
    if len(models) == 2:
        assert models["python"].to_json() == models["compiled"].to_json(), \
            "backends trained different models"
        print("trained models byte-identical across backends: OK")
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=600)
    parser.add_argument("--rules", type=int, default=40)
    parser.add_argument("--iterations", type=int, default=400)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {sorted(backends)}")
    if "compiled" not in backends:
        print("compiled kernel not built; only timing the python backend")

    print(f"\n-- training replay ({args.points} points, {args.rules} rules) --")
    replay = bench_replay(backends, args.points, args.rules)
    for name, dt in replay.items():
        print(f"  {name:9s} {dt * 1e3:9.3f} ms/replay")
    if len(replay) == 2:
        print(f"  speedup   {replay['python'] / replay['compiled']:9.1f}x")

    print(f"\n-- full training run ({args.points} points, {args.iterations} iterations) --")
    full = bench_train(args.points, args.iterations)
    for name, dt in full.items():
        print(f"  {name:9s} {dt:9.3f} s/train")
    if len(full) == 2:
        print(f"  speedup   {full['python'] / full['compiled']:9.1f}x")


if __name__ == "__main__":
    main()
