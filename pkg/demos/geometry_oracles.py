"""Exercise the three independent geometric checkers: brute-force region
counting vs the closed-form count, Monte Carlo cap coverage vs the exact
rational law, and the uniqueness oracle on easy vs hostile anchors.

Run: python3 demos/geometry_oracles.py
"""

import math
from fractions import Fraction

import numpy as np

from phasemax import (
    COMPLEX,
    coverage_mc,
    gen_instance,
    halfsphere_cover_prob_exact,
    make_approx_at_angle,
    regions_brute_force,
    regions_count,
    uniqueness_check,
)


def main():
    print("-- regions cut from the sphere by k random central hyperplanes --")
    print(f"{'n':>3} {'k':>3} {'formula':>8} {'sampled':>8}")
    for n, k in [(2, 4), (3, 5), (4, 6)]:
        rng = np.random.default_rng([27, n, k])
        brute = regions_brute_force(n, k, rng, samples=10**6)
        print(f"{n:>3} {k:>3} {regions_count(n, k):>8} {brute:>8}")

    print("\n-- probability that m random half-spheres cover the sphere --")
    print(f"{'n':>3} {'m':>3} {'exact':>12} {'monte carlo':>12}")
    rng = np.random.default_rng(11)
    for n, m in [(2, 3), (2, 5), (3, 6)]:
        exact = halfsphere_cover_prob_exact(m, n)
        hit = coverage_mc(n, m, math.pi / 2, trials=20000, rng=rng)
        print(f"{n:>3} {m:>3} {str(exact):>12} {hit:>12.4f}")
    check = halfsphere_cover_prob_exact(6, 3) == 1 - Fraction(regions_count(3, 6), 2**6)
    print(f"rational identity p = 1 - r(n,m)/2^m at (n=3, m=6): {check}")

    print("\n-- uniqueness oracle: does a descent direction exist at the truth? --")
    inst = gen_instance(8, 60, COMPLEX, seed=5)
    for beta_deg in (15.0, 85.0):
        rng = np.random.default_rng(int(beta_deg))
        anchored = inst.with_xhat(
            make_approx_at_angle(inst.truth, math.radians(beta_deg), rng))
        report = uniqueness_check(anchored.ensemble, anchored.truth, anchored.xhat)
        verdict = "recovery can fail" if report.nontrivial else "truth is the unique optimum"
        print(f"anchor at {beta_deg:>4.0f} degrees: nontrivial={report.nontrivial}  "
              f"({verdict})")
        if report.nontrivial:
            print(f"  witness direction, objective value {report.objective_value:.3e}")


if __name__ == "__main__":
    main()
