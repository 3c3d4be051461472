"""Probe the stable family f_a = a|z|^(2(p-1))G + z beyond the default moduli.

For random G scaled to a chosen sup T6, sweep |a| up to 0.999 on a ring of
angles and tabulate oracle failures per modulus.

    python3 scripts/stable_moduli.py --instances 10 --sup 0.49
"""
import argparse

import numpy as np

from uniharm import criteria, oracle
from uniharm.core import HarmonicComponent, PolyZZbar, TwoTermMap

Z = HarmonicComponent((0, 1), (0,))
MODULI = (0.5, 0.9, 0.95, 0.99, 0.999)


def random_poly(rng, degree):
    return PolyZZbar([(m, n, complex(*rng.uniform(-1, 1, 2)))
                      for m in range(degree + 1) for n in range(degree + 1 - m)])


def scaled_instance(rng, target):
    """Bisect the scale of G until sup T6 hits ``target`` (T6 grows monotonically with it)."""
    p = int(rng.integers(2, 4))
    G = random_poly(rng, int(rng.integers(0, 4)))
    lo, hi = 0.0, 1.0
    while criteria.sup_disk(criteria.RatioKind.T6, TwoTermMap(p, G * hi, Z)).value < target:
        hi *= 2
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if criteria.sup_disk(criteria.RatioKind.T6, TwoTermMap(p, G * mid, Z)).value < target:
            lo = mid
        else:
            hi = mid
    return p, G * lo


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--sup", type=float, default=0.49)
    ap.add_argument("--angles", type=int, default=8)
    ap.add_argument("--grid", type=int, default=128)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    fails = {m: 0 for m in MODULI}
    for i in range(args.instances):
        p, G = scaled_instance(np.random.default_rng([args.seed, i]), args.sup)
        for m in MODULI:
            a = oracle.default_a_samples(args.angles, (m,), include_zero=False)
            res = oracle.stable_sweep(G, Z, p, a, n=args.grid)
            fails[m] += sum(not v.passed for _, v in res)
    total = args.instances * args.angles
    print(f"sup T6 = {args.sup}, {args.instances} instances x {args.angles} angles")
    for m in MODULI:
        print(f"|a| = {m:<6} failures {fails[m]}/{total}")


if __name__ == "__main__":
    main()
