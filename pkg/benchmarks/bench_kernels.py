"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with the best-of-N wall time of each backend and
the speedup. Also times one desk-scale drop end to end under each backend.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from irs_tdma import kernels

DROP_SNIPPET = (
    "from irs_tdma.config import load_profile;"
    "from irs_tdma.evaluation import run_sweep;"
    "from irs_tdma.clustering import Policy;"
    "import time; s = load_profile('desk').scenario; t = time.perf_counter();"
    "run_sweep(s, list(Policy), (1, 5, 10, 20, 30, 40, 50), 2, master_seed=0);"
    "print(time.perf_counter() - t)"
)


def cases(rng):
    a = rng.standard_normal((2, 200)) + 1j * rng.standard_normal((2, 200))
    start = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    pts = rng.uniform(0, 2 * np.pi, (100, 200))
    cent = pts[:20].copy()
    lab = rng.integers(0, 20, 100)
    w = rng.random(100)
    return {
        "dominant_pair 2x200": lambda k: k.dominant_pair(a, start, 1e-10, 10_000),
        "nearest_centroid 100x200, Z=20": lambda k: k.nearest_centroid(pts, cent),
        "average_linkage K=100 -> 10": lambda k: k.average_linkage(pts, 10),
        "circular_resultant 100x200, Z=20": lambda k: k.circular_resultant(pts, w, lab, 20),
    }


def drop_time(pure):
    env = dict(os.environ)
    if pure:
        env["IRS_TDMA_PURE_PYTHON"] = "1"
    else:
        env.pop("IRS_TDMA_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", DROP_SNIPPET], capture_output=True, text=True, env=env, check=True)
    return float(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backs = kernels.available_backends()
    if "cython" not in backs:
        print("compiled extension not built; only the numpy fallback is available")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<36}{'cython [ms]':>12}{'python [ms]':>12}{'speedup':>9}")
    for name, fn in cases(rng).items():
        t = {}
        for b in ("cython", "python"):
            n = 3
            t[b] = min(timeit.repeat(lambda: fn(backs[b]), number=n, repeat=args.repeat)) / n * 1e3
        print(f"{name:<36}{t['cython']:>12.3f}{t['python']:>12.3f}{t['python'] / t['cython']:>8.1f}x")
    c, p = drop_time(False), drop_time(True)
    print(f"{'desk sweep, 2 drops, all policies':<36}{c * 1e3:>12.0f}{p * 1e3:>12.0f}{p / c:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
