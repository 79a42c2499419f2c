"""Compiled vs pure-Python kernels: labeling and the filtered-Dice sweep.

    python benchmarks/bench_kernels.py --size 64 --repeat 3
"""
import argparse
import time

import numpy as np

from flairbase._kernels import available_backends


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64, help="cube edge in voxels")
    ap.add_argument("--density", type=float, default=0.3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--connectivity", type=int, default=26, choices=(6, 18, 26))
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    shape = (args.size,) * 3
    mask = np.ascontiguousarray(rng.random(shape) < args.density, dtype=np.uint8)
    scores = rng.random(shape).ravel()
    gt = (rng.random(scores.size) < 0.05).astype(np.uint8)
    order = np.argsort(-scores, kind="stable").astype(np.int64)
    records = np.linspace(0, scores.size, 101).astype(np.int64)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the Python fallback only")
    print(f"{args.size}^3 voxels, density {args.density}, connectivity {args.connectivity}")
    results = {}
    for name, mod in sorted(backends.items()):
        t_label = best_time(lambda: mod.label_components(mask, args.connectivity), args.repeat)
        t_sweep = best_time(
            lambda: mod.sweep_components(order, shape, gt, records, args.connectivity, 20), args.repeat
        )
        results[name] = (t_label, t_sweep)
        print(f"{name:7s} label {t_label * 1e3:9.1f} ms   sweep {t_sweep * 1e3:9.1f} ms")
    if len(results) == 2:
        (cl, cs), (pl, ps) = results["cython"], results["python"]
        print(f"speedup  label {pl / cl:8.1f}x     sweep {ps / cs:8.1f}x")


if __name__ == "__main__":
    main()
