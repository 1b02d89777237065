"""How convergence grows with the ring size.

Divides the median step count by m*n and prints the ratio per size.  A flat
ratio means the growth matches m*n.  Results land in ./sweep_out.
"""

from popproto import harness

summary, rows = harness.sweep("plru", "ring", [6, 12, 24], trials=30, seed=0, out="sweep_out")
for s in summary.sizes:
    print(f"n={s.n:3d} m={s.m:3d} median={s.median:8.0f} p95={s.p95:8.0f} "
          f"median/(mn)={s.median_ratio:.3f}")
print("spread of ratios:", round(summary.ratio_spread, 2))
print("wrote", len(rows), "rows to sweep_out/trials.csv")
