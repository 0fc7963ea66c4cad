"""Residual against subdivision count for the midpoint and CF4 steppers.

    python scripts/convergence_table.py --groups so3 gl3 se2 --ns 4 8 16 32 64
"""
import argparse
import time

import numpy as np

from lpevol import controls
from lpevol.evolution import convergence_study
from lpevol.lie import make_group

GROUP_ARGS = {"so3": ("so3", {}), "gl2": ("gl", {"n": 2}), "gl3": ("gl", {"n": 3}),
              "se2": ("se2", {}), "heisenberg": ("heisenberg", {})}


def smooth_control(G, seed):
    rng = np.random.default_rng(seed)
    A, B = G.random_algebra(rng), G.random_algebra(rng)
    return controls.trig([(A.ravel(), 3.0, 0.2), (B.ravel(), 5.0, 1.1)])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--groups", nargs="+", default=["so3", "gl3", "se2"], choices=sorted(GROUP_ARGS))
    ap.add_argument("--ns", nargs="+", type=int, default=[4, 8, 16, 32, 64])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for key in args.groups:
        name, params = GROUP_ARGS[key]
        G = make_group(name, **params)
        gamma = smooth_control(G, args.seed)
        print(f"\n{G}")
        print(f"{'n':>6} {'midpoint':>12} {'cf4':>12}")
        t0 = time.perf_counter()
        mid_rows, mid_slope = convergence_study(G, gamma, "midpoint", args.ns)
        cf4_rows, cf4_slope = convergence_study(G, gamma, "cf4", args.ns)
        for a, b in zip(mid_rows, cf4_rows):
            print(f"{a.n:>6} {a.residual:>12.3e} {b.residual:>12.3e}")
        print(f"{'slope':>6} {mid_slope:>12.3f} {cf4_slope:>12.3f}   ({time.perf_counter() - t0:.2f} s)")


if __name__ == "__main__":
    main()
