"""Desk-scale laboratory for the two-dimensional random-field Ising model.

Exact oracles on tiny lattices, cluster Monte Carlo with quenched Gaussian
disorder and +- boundary conditions, disagreement-percolation analysis, and
estimators for the boundary influence, its N^{-1/8} critical decay, the
eps^{8/7} N collapse, and the correlation-length crossover.
"""

__version__ = "0.1.0"

from .disorder import Field, Seed, flip_field, sample_field, zero_field
from .lattice import Region, build_region, dual_site, extend
from .model import GibbsSpec, T_C, fk_p
from .oracle import (EventSpec, PairSpec, exact_correlation, exact_partition,
                     exact_pair_event_prob, exact_spin_average,
                     exact_surface_tension)

__all__ = [
    "Field", "Seed", "flip_field", "sample_field", "zero_field",
    "Region", "build_region", "dual_site", "extend",
    "GibbsSpec", "T_C", "fk_p",
    "EventSpec", "PairSpec", "exact_correlation", "exact_partition",
    "exact_pair_event_prob", "exact_spin_average", "exact_surface_tension",
    "__version__",
]
