#!/usr/bin/env python3
"""Benchmark the compiled chain kernel against the pure-Python twin.

Both kernels consume identical pre-drawn site/uniform arrays, so the outputs
are checked for bit equality while timing.  Run after `pip install -e .`:

    python benchmarks/bench_chain.py --n 300 --steps 200000
"""

import argparse
import time

import numpy as np

from gibbs_tv import _chain_py
from gibbs_tv.graph import random_graph
from gibbs_tv.models import HardcoreModel, IsingModel

try:
    from gibbs_tv import _chain
except ImportError:
    _chain = None


def time_kernel(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        state = args[-3].copy()
        call = args[:-3] + (state,) + args[-2:]
        t0 = time.perf_counter()
        fn(*call)
        best = min(best, time.perf_counter() - t0)
    return best, state


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=300, help="vertex count")
    parser.add_argument("--steps", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    g = random_graph(args.n, min(1.0, 6.0 / args.n), rng)
    lam = rng.uniform(0.1, 1.0, args.n)
    hardcore = HardcoreModel(g, lam)
    ising = IsingModel(
        g,
        {e: float(rng.uniform(-0.4, 0.4)) for e in g.edges},
        rng.uniform(-0.5, 0.5, args.n),
    )

    sites = rng.integers(0, args.n, size=args.steps)
    us = rng.random(args.steps)
    init = np.full(args.n, -1, dtype=np.int8)
    p_plus = lam / (1.0 + lam)

    print(f"graph: n={g.n} m={g.m}, steps={args.steps}, repeats={args.repeats}")
    header = f"{'kernel':<10} {'model':<9} {'seconds':>10} {'steps/s':>14}"
    print(header)
    print("-" * len(header))

    rows = {}
    for model_name, fn_name, call_args in [
        ("hardcore", "run_hardcore",
         (g.indptr, g.indices, p_plus, init, sites, us)),
        ("ising", "run_ising",
         (g.indptr, g.indices, ising.csr_j, ising.h, init, sites, us)),
    ]:
        results = {}
        for kernel_name, module in [("python", _chain_py), ("compiled", _chain)]:
            if module is None:
                continue
            secs, state = time_kernel(getattr(module, fn_name), call_args, args.repeats)
            results[kernel_name] = (secs, state)
            print(f"{kernel_name:<10} {model_name:<9} {secs:>10.4f} "
                  f"{args.steps / secs:>14.0f}")
        rows[model_name] = results

    for model_name, results in rows.items():
        if "compiled" in results and "python" in results:
            same = np.array_equal(results["compiled"][1], results["python"][1])
            speedup = results["python"][0] / results["compiled"][0]
            print(f"{model_name}: speedup {speedup:.0f}x, outputs identical: {same}")
            if not same:
                raise SystemExit(f"{model_name}: kernel outputs diverge")
    if _chain is None:
        print("compiled kernel unavailable; build with `pip install -e .`")


if __name__ == "__main__":
    main()
