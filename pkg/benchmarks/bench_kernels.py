"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeats 7]

Reports the median wall time per call for each backend and the speedup.
"""
import argparse
import timeit

import numpy as np

from robust_lsq import _backend
from robust_lsq.consolidation import MedianConfig, geometric_median
from robust_lsq.datagen import SynthSpec, generate
from robust_lsq.hrr import hrr_fit


def cases(rng):
    small = np.sort(np.abs(rng.standard_normal(50)))
    large = np.sort(np.abs(rng.standard_normal(20000)))
    pts = rng.standard_normal((7, 20))
    (batch,), _ = generate(SynthSpec(20, 2000, 1, 0.3, 0.1, seed=1))
    cfg = MedianConfig()
    return {
        "threshold_sizes n=50": lambda k: k.threshold_sizes(small),
        "threshold_sizes n=20000": lambda k: k.threshold_sizes(large),
        "weiszfeld 7x20": lambda k: k.weiszfeld(pts, pts.mean(axis=0), 1000, 1e-10, 1e-12),
        "geometric_median 7x20": lambda k: geometric_median(pts, cfg),
        "hrr_fit p=20 n=2000": lambda k: hrr_fit(batch),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=7)
    args = ap.parse_args()
    names = _backend.available()
    print(f"backends: {', '.join(names)}")
    print(f"{'case':<26}" + "".join(f"{n:>12}" for n in names) + "   speedup")
    for label, fn in cases(np.random.default_rng(0)).items():
        row = []
        for name in names:
            with _backend.use_backend(name) as k:
                timer = timeit.Timer(lambda: fn(k))
                number, _ = timer.autorange()
                row.append(np.median(timer.repeat(args.repeats, number)) / number)
        speed = f"{row[-1] / row[0]:9.1f}x" if len(row) > 1 else ""
        print(f"{label:<26}" + "".join(f"{t * 1e6:10.1f}us" for t in row) + speed)


if __name__ == "__main__":
    main()
