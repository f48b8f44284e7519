"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--trials N] [--repeat R]

Prints one CSV row per (kernel, backend) with the best wall time of R runs,
and checks that both backends return identical results.
"""

import argparse
import importlib
import sys
import time

import numpy as np


def load(name):
    try:
        return importlib.import_module(f"psmr.{name}")
    except ImportError:
        return None


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = {"python": load("_fallback"), "cython": load("_kernels")}
    if backends["cython"] is None:
        print("compiled kernels not built; only the fallback is timed", file=sys.stderr)
    backends = {k: v for k, v in backends.items() if v is not None}

    rng = np.random.default_rng(0)
    size, q, m = 102_400, 10_000, 200
    keys = rng.choice(10**8, size=q + args.trials, replace=False).astype(np.uint64)
    slots = (keys % size).astype(np.int64)
    nb = max(args.trials // m, q // m + 1)
    batch = rng.integers(0, size, size=(nb, m), dtype=np.int64)
    records = [b"k%08d" % i for i in range(20_000)]

    cases = {
        "hash_bytes": lambda k: [k.hash_bytes(r, 7) for r in records],
        "hash_keys": lambda k: k.hash_keys(keys, 7),
        "window_collisions": lambda k: k.window_collisions(slots, q, size),
        "batch_window_conflicts": lambda k: k.batch_window_conflicts(batch, q // m, q // m, size),
    }
    print("kernel,backend,seconds,speedup")
    ok = True
    for name, fn in cases.items():
        results = {}
        times = {}
        for bname, mod in backends.items():
            times[bname], results[bname] = best_of(lambda: fn(mod), args.repeat)
        vals = list(results.values())
        same = all(np.array_equal(np.asarray(vals[0]), np.asarray(v)) for v in vals[1:])
        ok &= same
        for bname, t in times.items():
            print(f"{name},{bname},{t:.4f},{times['python'] / t:.1f}")
        if not same:
            print(f"{name}: backends disagree", file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
