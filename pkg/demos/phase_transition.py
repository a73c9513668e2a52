"""Sweep the measurement budget through the recovery transition and print
empirical success rates next to the closed-form lower bound.

Run: python3 demos/phase_transition.py   (about a minute on one core)
"""

import math

from phasemax import SweepConfig, alpha_of_beta, phasemax_success_bound, run_sweep

BAR = 28


def bar(frac: float) -> str:
    full = int(round(frac * BAR))
    return "#" * full + "." * (BAR - full)


def main():
    n = 20
    betas = (25.0, 45.0)
    cfg = SweepConfig(
        n=n,
        beta_list=tuple(math.radians(d) for d in betas),
        m_grid=tuple(range(4 * n, 14 * n + 1, 20)),
        trials_per_cell=25,
        seed=17,
    )
    print(f"n={n}, complex unit-sphere rows, anchors at fixed angles, "
          f"{cfg.trials_per_cell} trials per cell")
    table = run_sweep(cfg)
    for beta_deg in betas:
        alpha = alpha_of_beta(math.radians(beta_deg))
        print(f"\nanchor angle {beta_deg:.0f} degrees  (alpha = {alpha:.3f}, "
              f"predicted transition near m = 4n/alpha = {4 * n / alpha:.0f})")
        print(f"{'m':>5} {'rate':>6} {'bound':>7}  curve")
        for row in table.rows:
            if abs(row.beta_deg - beta_deg) > 1e-9:
                continue
            bound = phasemax_success_bound(row.m, n, alpha, cfg.field)
            tag = f"{bound.value:7.3f}" if bound.valid else "      -"
            print(f"{row.m:>5} {row.rate:6.2f} {tag}  |{bar(row.rate)}|")
    print("\nup to the sampling error of 25 draws per cell, rates sit at or"
          "\nabove the bound wherever it applies, and the jump from rare to"
          "\nroutine recovery spans only a few grid steps")


if __name__ == "__main__":
    main()
