"""Largest rescaled-restriction norm of t^alpha against n, next to the closed form.

The k-th rescaled restriction of gamma to [k/n, (k+1)/n] is s -> gamma(k/n + s/n) / n,
on [0, 1], so for gamma(t) = t^alpha with alpha < 0 the first cell dominates with
L^p norm n^(-1 - alpha) * (alpha p + 1)^(-1/p).

    python scripts/subdivision_table.py --alpha -0.333333 --p 1 1.2 1.4
"""
import argparse
import math
import time

from lpevol import controls
from lpevol.errors import NotInLp
from lpevol.lebesgue import subdivision_norms
from lpevol.measurable import Seminorm

ABS = Seminorm("abs", dim=1, index=0)


def closed_form(alpha, p, n):
    return n ** (-1 - alpha) * (alpha * p + 1) ** (-1 / p)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=-1 / 3)
    ap.add_argument("--p", nargs="+", type=float, default=[1.0, 1.2, 1.4])
    ap.add_argument("--max-log2n", type=int, default=12)
    args = ap.parse_args()

    gamma = controls.power([1.0], args.alpha)
    ns = [2 ** k for k in range(args.max_log2n + 1)]
    for p in args.p:
        print(f"\np = {p:g}, alpha = {args.alpha:.6g}")
        t0 = time.perf_counter()
        try:
            maxima = [max(subdivision_norms(gamma, n, ABS, p)) for n in ns]
        except NotInLp:
            print("  not in L^p")
            continue
        print(f"{'n':>6} {'max_k norm':>14} {'closed form':>14}")
        for n, m in zip(ns, maxima):
            print(f"{n:>6} {m:>14.6e} {closed_form(args.alpha, p, n):>14.6e}")
        rate = math.log(maxima[-2] / maxima[-1], 2)
        print(f"  observed decay exponent {rate:.4f}, expected {1 + args.alpha:.4f}"
              f"  ({time.perf_counter() - t0:.2f} s)")


if __name__ == "__main__":
    main()
