"""Compare the two Lambda coefficients of ratio T2 on random biharmonic/triharmonic maps.

Each instance is rescaled so that sup T2 = 0.9 under the chosen coefficient
variant, then checked for a sign change of the Jacobian and for collisions.
A sufficient criterion must never admit a map that folds.

    python3 scripts/t2_coefficients.py --instances 200 --seed 0
"""
import argparse
import time

import numpy as np

from uniharm import criteria, oracle
from uniharm.core import AlmansiMap, HarmonicComponent, PolyZZbar

Z = HarmonicComponent((0, 1), (0,))


def random_poly(rng, degree):
    return PolyZZbar([(m, n, complex(*rng.uniform(-1, 1, 2)))
                      for m in range(degree + 1) for n in range(degree + 1 - m)])


def run(instances, seed, grid, target):
    counts = {v: {"J<=0": 0, "collision": 0, "pass": 0} for v in ("printed", "corrected")}
    for i in range(instances):
        rng = np.random.default_rng([seed, i])
        p = int(rng.integers(2, 4))
        comps = [random_poly(rng, int(rng.integers(0, 5))) for _ in range(p - 1)]
        for variant in counts:
            s = criteria.sup_disk(criteria.RatioKind.T2, AlmansiMap(p, comps + [Z]),
                                  coefficients=variant).value
            f = AlmansiMap(p, [c * (target / s) for c in comps] + [Z]).lower()
            if oracle.jacobian_scan(f, grid).min_J <= 0:
                counts[variant]["J<=0"] += 1
            elif oracle.injectivity_scan(f, grid).status == "collision":
                counts[variant]["collision"] += 1
            else:
                counts[variant]["pass"] += 1
    return counts


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", type=int, default=128)
    ap.add_argument("--target", type=float, default=0.9, help="sup T2 after rescaling")
    args = ap.parse_args()
    t0 = time.perf_counter()
    counts = run(args.instances, args.seed, args.grid, args.target)
    print(f"{'variant':<10} {'J<=0':>6} {'collision':>10} {'pass':>6}")
    for variant, c in counts.items():
        print(f"{variant:<10} {c['J<=0']:>6} {c['collision']:>10} {c['pass']:>6}")
    print(f"{args.instances} instances, sup T2 = {args.target}, "
          f"{time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
