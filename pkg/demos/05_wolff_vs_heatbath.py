"""Cluster updates beat single-site dynamics at criticality.

Measures the integrated autocorrelation time of |magnetization| under Wolff
cluster updates and under checkerboard heat-bath sweeps on the same box at
T_c.  The ratio is reported as a diagnostic; no fixed number is asserted.
"""

from rfim2d import estimators as est

out = est.wolff_vs_heatbath_autocorrelation(N=16, seed=0, n_steps=2000)
print(f"tau(|m|) under Wolff updates:      {out['wolff']:7.2f}")
print(f"tau(|m|) under heat-bath sweeps:   {out['heat_bath']:7.2f}")
print(f"heat-bath / Wolff ratio:           {out['ratio_heatbath_over_wolff']:7.2f}")
