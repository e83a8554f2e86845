"""Good boxes: does the local field leave room for disagreement circuits?

A box is good when (i) pre-disagreement circuits around it stay likely under
the extreme boundary pair and (ii) most single-site disagreement
probabilities stay within a factor two of their zero-field values.  A benign
field keeps boxes good; a strong uniform field kills both properties.
"""

import numpy as np

from rfim2d import estimators as est
from rfim2d.disorder import Field, zero_field
from rfim2d.lattice import build_region

ambient = build_region("box", 12)

benign = zero_field(ambient)
v = est.classify_good_box((0, 0), 2, benign, 0.1, budget=10**7, seed=2,
                          snapshots=200, n_sites=4)
print(f"benign field:  verdict={v.verdict}  circuit prob={v.around_worst:.3f} "
      f"(anti extreme {v.around_anti:.4f})  fraction={v.fraction:.2f}")

hot = Field(ambient, np.full(ambient.n_interior, 10.0), None)
v = est.classify_good_box((0, 0), 2, hot, 3.0, budget=10**7, seed=2,
                          snapshots=200, n_sites=4)
print(f"pinned field:  verdict={v.verdict}  circuit prob={v.around_worst:.3f} "
      f"(anti extreme {v.around_anti:.4f})  fraction={v.fraction:.2f}")
