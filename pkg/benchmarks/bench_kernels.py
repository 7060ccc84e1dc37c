"""Compare the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the backend is chosen at
import time from ``STABLE_ALLOC_NUMBA``.  Compilation is excluded by a
warm-up run on a small instance.

    python3 benchmarks/bench_kernels.py --sizes 128,256,512 --repeat 3
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from stable_alloc import Region, build_grid, sample_poisson, allocate_greedy, verify_stability, backend_name

sizes, repeat, alphas = json.loads(sys.argv[1])
warm = Region.torus(4, 4)
verify_stability(allocate_greedy(build_grid(warm, (16, 16)), sample_poisson(1.0, warm, 0), 1.0))
rows = []
for m in sizes:
    region = Region.torus(32, 32)
    grid = build_grid(region, (m, m))
    cs = sample_poisson(1.0, region, 0)
    for alpha in alphas:
        t_alloc, t_verify = [], []
        for _ in range(repeat):
            t0 = time.perf_counter()
            alloc = allocate_greedy(grid, cs, alpha)
            t1 = time.perf_counter()
            pairs = verify_stability(alloc)
            t2 = time.perf_counter()
            t_alloc.append(t1 - t0)
            t_verify.append(t2 - t1)
        rows.append({"backend": backend_name(), "m": m, "alpha": alpha, "allocate": min(t_alloc),
                     "verify": min(t_verify), "unstable": len(pairs),
                     "digest": hash(alloc.assignment.tobytes())})
print(json.dumps(rows))
"""


def run_backend(flag, sizes, repeat, alphas):
    env = dict(os.environ, STABLE_ALLOC_NUMBA=flag, PYTHONHASHSEED="0")
    proc = subprocess.run(
        [sys.executable, "-c", WORKER, json.dumps([sizes, repeat, alphas])],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(proc.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="128,256,512", help="grid cells per side on a 32x32 torus")
    parser.add_argument("--alphas", default="0.5,2", help="appetites to time")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(v) for v in args.sizes.split(",")]
    alphas = [float(v) for v in args.alphas.split(",")]
    fast = run_backend("1", sizes, args.repeat, alphas)
    slow = run_backend("0", sizes, args.repeat, alphas)
    print(f"{'m':>5} {'alpha':>6} {'numba alloc':>12} {'numpy alloc':>12} {'numba verify':>13} {'numpy verify':>13} {'same':>5}")
    for f, s in zip(fast, slow):
        same = f["digest"] == s["digest"] and f["unstable"] == s["unstable"]
        print(f"{f['m']:>5} {f['alpha']:>6g} {f['allocate']:>11.3f}s {s['allocate']:>11.3f}s "
              f"{f['verify']:>12.3f}s {s['verify']:>12.3f}s {str(same):>5}")


if __name__ == "__main__":
    main()
