#!/usr/bin/env python3
"""Benchmark the jet-evaluation kernels: compiled core vs pure fallback.

The tape evaluator is the hot inner loop of every check (metric, frame and
structure components are all parsed expressions), so this is the number that
decides end-to-end runtime.

    python3 benchmarks/bench_jets.py [--repeat N]
"""

import argparse
import time

import numpy as np

from nullgeo.expr import parse
from nullgeo.expr import _pure

try:
    from nullgeo.expr import _core
except ImportError:
    _core = None

CASES = [
    ("metric-entry", "1 + 4*y5^2", ["x5", "y5"], 2),
    ("frame-component", "2*y5", ["x5", "y5"], 1),
    ("constraint", "x2*sin(theta) + y2*cos(theta)", ["x2", "y2"], 2),
    (
        "curved-metric",
        "(1 + 0.1*sin(u)*cos(v))/(u^2 + 1.5) + sqrt(v^2 + 2)",
        ["u", "v"],
        2,
    ),
    (
        "deep",
        "sin(x1*x2)*exp(x3/4) + sqrt((x1 - x2)^2 + 1.25)/(x3^2 + 2) + x1^(3/2)",
        ["x1", "x2", "x3"],
        2,
    ),
]


def bench(impl, tape, point, params, order, repeat):
    impl.eval_tape(tape, point, params, order)  # warm up
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            impl.eval_tape(tape, point, params, order)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()

    rng = np.random.default_rng(1)
    print(f"{'case':<18} {'order':>5} {'pure':>12} {'compiled':>12} {'speedup':>8}")
    for name, text, coords, order in CASES:
        params = ["theta"] if "theta" in text else []
        e = parse(text, coords, params)
        point = rng.uniform(0.5, 1.5, size=len(coords))
        parr = np.array([0.7]) if params else np.zeros(1)
        tp = bench(_pure, e._tape, point, parr, order, args.repeat)
        if _core is None:
            print(f"{name:<18} {order:>5} {tp * 1e6:>10.2f}us {'n/a':>12} {'n/a':>8}")
            continue
        tc = bench(_core, e._tape, point, parr, order, args.repeat)
        print(
            f"{name:<18} {order:>5} {tp * 1e6:>10.2f}us {tc * 1e6:>10.2f}us {tp / tc:>7.1f}x"
        )

    if _core is None:
        print("\ncompiled core not built: run `python3 setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
