"""Compare the compiled and pure-NumPy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 1000000]
"""

import argparse
import timeit

import numpy as np

from phykey_lab import kernels
from phykey_lab.channelsim import constellation


def cases(size, rng):
    side = int(np.sqrt(size)) // 2 * 2
    mat = rng.integers(0, 256, (side, side))
    key = np.array([[1, 1], [21428, 21429]], dtype=np.int64)
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    pts = constellation(8)
    rss = rng.exponential(size=size)
    return {
        f"tile_matmul {side}x{side}": ("tile_matmul", (mat, key)),
        f"psk_nearest M=8 n={size}": ("psk_nearest",
                                      (z.real.copy(), z.imag.copy(),
                                       pts.real.copy(), pts.imag.copy())),
        f"rss_threshold w=250 n={size}": ("rss_threshold", (rss, 250, 0.8, -0.8)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=10**6)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}")
    for label, (name, fargs) in cases(args.size, rng).items():
        times = {}
        for b, mod in backends.items():
            fn = getattr(mod, name)
            times[b] = min(timeit.repeat(lambda: fn(*fargs), number=1, repeat=args.repeat))
        row = f"{label:34s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
