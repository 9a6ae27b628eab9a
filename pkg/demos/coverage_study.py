"""Small Monte Carlo coverage study (a desk-scale version of the big runs).

Each replication draws a fresh sample, re-selects the bandwidth, fits the
whole grid, and records pointwise intervals and the simultaneous band.  The
table mirrors the report format of the CLI `simulate` subcommand; for the
full-size study run, e.g.:

    bddist simulate --n 20000 --reps 2000 --c0 8 --seed 1 --out report.csv
"""

import time

from bddist import RuleOfThumb, make_grid
from bddist.simulation import default_dgp, run_monte_carlo

spec = default_dgp()
grid = make_grid(spec.boundary, 11)

t0 = time.time()
report = run_monte_carlo(spec, n=3000, reps=150, grid=grid, p=1,
                         kernel="triangular", bw_rule=RuleOfThumb(c0=8.0),
                         alpha=0.05, band_draws=5000, seed=99)
elapsed = time.time() - t0

print(f"n = {report.n}, replications used = {report.reps_used} "
      f"(failed: {report.n_failed}), elapsed {elapsed:.1f}s\n")
print(f"{'point':>14} {'h':>7} {'bias':>8} {'sd':>7} {'rmse':>7} "
      f"{'ec':>6} {'il':>6}")
for row in report.rows:
    print(f"({row.b1:5.1f},{row.b2:5.1f}) {row.h:7.2f} {row.bias:+8.4f} "
          f"{row.sd:7.4f} {row.rmse:7.4f} {row.ec:6.3f} {row.il:6.3f}")
print(f"{'uniform':>14} {'':7} {'':8} {'':7} {'':7} "
      f"{report.uniform_ec:6.3f} {report.uniform_il:6.3f}")

print("\nmean simultaneous critical value:",
      f"{report.band_quantile.mean():.3f} (pointwise 1.960)")
