"""The boundary influence at the critical point decays like N^{-1/8}.

Estimates m(T_c, N, 0) through the coupled-chain disagreement representation
for a short ladder of box sizes and fits the log-log slope.  Budgets here are
demo-sized; the acceptance suite runs the tighter version.
"""

from rfim2d import estimators as est
from rfim2d.model import T_C

rows = []
for N, reps in ((4, 12), (8, 12), (16, 12), (32, 8)):
    sched = est.production_schedule(N, snapshots=300)
    e, _ = est.estimate_boundary_influence(T_C, N, 0.0, replicas=reps,
                                           schedule=sched, seed=11)
    rows.append((N, e.value, e.se))
    print(f"N={N:3d}: m = {e.value:.4f} +- {e.se:.4f}   m N^(1/8) = {e.value * N ** 0.125:.4f}")

slope, intercept, (lo, hi) = est.fit_power_law(rows)
print(f"\nfitted slope {slope:.4f} with 95% ci ({lo:.4f}, {hi:.4f}); expected -0.125")
