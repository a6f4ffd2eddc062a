"""Benchmark the curvature kernel: numba JIT vs the pure-Python fallback.

The backend is chosen at import time from CURVEPROBE_NO_NUMBA, so each
timing runs in a subprocess with the flag set accordingly.

Usage: python benchmarks/bench_curvature.py [--nodes 400] [--degree 12] [--repeats 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def run_once(nodes, degree, repeats):
    import numpy as np

    from curveprobe import make_graph
    from curveprobe._accel import numba_enabled
    from curveprobe.curvature import bfc_all

    rng = np.random.default_rng(1)
    p = min(degree / (nodes - 1), 1.0)
    edges = [(i, j) for i in range(nodes) for j in range(i + 1, nodes) if rng.random() < p]
    g = make_graph("bench", nodes, edges)

    bfc_all(g)  # warm-up (includes JIT compilation when active)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        values = bfc_all(g)
        times.append(time.perf_counter() - start)
    checksum = sum(v for _, v in values)
    return {
        "backend": "numba" if numba_enabled() else "python",
        "nodes": nodes,
        "edges": len(edges),
        "best_seconds": min(times),
        "checksum": checksum,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=400)
    parser.add_argument("--degree", type=float, default=12.0)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--_worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args._worker:
        print(json.dumps(run_once(args.nodes, args.degree, args.repeats)))
        return

    results = []
    for disable in ("0", "1"):
        env = dict(os.environ, CURVEPROBE_NO_NUMBA=disable)
        proc = subprocess.run(
            [sys.executable, __file__, "--_worker", "--nodes", str(args.nodes),
             "--degree", str(args.degree), "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True, check=True,
        )
        results.append(json.loads(proc.stdout))

    fast, slow = results
    assert abs(fast["checksum"] - slow["checksum"]) < 1e-9, "backends disagree"
    print(f"graph: {fast['nodes']} nodes, {fast['edges']} edges; best of {args.repeats}")
    for r in results:
        print(f"  {r['backend']:>7}: {r['best_seconds'] * 1e3:9.2f} ms")
    if slow["best_seconds"] > 0:
        print(f"  speedup: {slow['best_seconds'] / fast['best_seconds']:.1f}x")


if __name__ == "__main__":
    main()
