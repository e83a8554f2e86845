"""Gibbs specifications: temperature, region, boundary condition, field.

Conventions (J = 1 throughout):
  H(sigma) = -( sum_{u~v interior} s_u s_v + sum_{u interior, b boundary, u~b} s_u xi_b
               + sum_{u interior} eps h_u s_u ),
so only edges with at least one interior endpoint enter the Hamiltonian;
spins live on the interior, the boundary carries the frozen condition xi and
no field.  The FK parameter is p = 1 - exp(-2/T), the extended-model edge
weight ratio t^2 = (1-p)/p, and T_c = 2/ln(1+sqrt 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .disorder import Field, zero_field
from .lattice import Region, region_edges

T_C = 2.0 / math.log(1.0 + math.sqrt(2.0))
T_FLOOR = 1e-3


def fk_p(T: float) -> float:
    return 1.0 - math.exp(-2.0 / T)


def edge_t2(T: float) -> float:
    return 1.0 / math.expm1(2.0 / T)


def edge_lambda(T: float) -> float:
    return math.sqrt(2.0 * math.sinh(1.0 / T))


class SpecError(ValueError):
    pass


def boundary_values(region: Region, bc) -> np.ndarray:
    """Resolve a boundary condition to +-1 values over region.boundary.

    Accepted forms: "+"/"-"/+1/-1 (uniform); ("+", "-") as (inner, outer) for
    annuli; a dict {(x, y): +-1} covering the whole boundary; or an array
    aligned with region.boundary.
    """
    nb = len(region.boundary)
    if isinstance(bc, str) and bc in ("+", "-"):
        return np.full(nb, 1 if bc == "+" else -1, dtype=np.int8)
    if isinstance(bc, (int, np.integer)) and bc in (1, -1):
        return np.full(nb, bc, dtype=np.int8)
    if isinstance(bc, tuple) and len(bc) == 2 and region.kind == "annulus":
        inner, outer = (boundary_values_scalar(v) for v in bc)
        vals = np.zeros(nb, dtype=np.int8)
        inner_set = set(map(tuple, region.inner_boundary.tolist()))
        for i, (x, y) in enumerate(region.boundary.tolist()):
            vals[i] = inner if (x, y) in inner_set else outer
        return vals
    if isinstance(bc, dict):
        vals = np.zeros(nb, dtype=np.int8)
        for i, (x, y) in enumerate(region.boundary.tolist()):
            if (x, y) not in bc:
                raise SpecError(f"boundary condition missing site ({x}, {y})")
            v = bc[(x, y)]
            if v not in (1, -1):
                raise SpecError("boundary spins must be +-1")
            vals[i] = v
        return vals
    arr = np.asarray(bc, dtype=np.int8)
    if arr.shape != (nb,):
        raise SpecError(f"boundary array must have shape ({nb},)")
    if not np.all(np.abs(arr) == 1):
        raise SpecError("boundary spins must be +-1")
    return arr.copy()


def boundary_values_scalar(v) -> int:
    if v in ("+", 1):
        return 1
    if v in ("-", -1):
        return -1
    raise SpecError(f"bad boundary value {v!r}")


@dataclass(frozen=True)
class GibbsSpec:
    """Everything needed to define one Gibbs / extended / FK measure."""

    region: Region
    T: float
    bc: object = "+"
    field: Field | None = None
    eps: float = 0.0

    def __post_init__(self):
        if not self.T > 0:
            raise SpecError(f"temperature must be positive, got {self.T}")
        if self.eps < 0:
            raise SpecError("disorder strength eps must be >= 0")
        if self.field is not None and self.field.region is not self.region:
            if not np.array_equal(self.field.region.vertices, self.region.vertices):
                raise SpecError("field is defined on a different region")
        p = self.p
        if not 0.0 < p < 1.0:
            raise SpecError("FK parameter p out of (0,1)")

    @property
    def p(self) -> float:
        return fk_p(self.T)

    @property
    def t2(self) -> float:
        return edge_t2(self.T)

    def xi(self) -> np.ndarray:
        return boundary_values(self.region, self.bc)

    def field_values(self) -> np.ndarray:
        """eps * h on the interior vertices (zeros when no field)."""
        h = self.field.values if self.field is not None else np.zeros(self.region.n_interior)
        return self.eps * h

    def flipped(self) -> "GibbsSpec":
        """Global flip of (boundary, field): the spin-flip image of this spec."""
        base = self.field.values if self.field is not None else np.zeros(self.region.n_interior)
        return GibbsSpec(self.region, self.T, -self.xi(), Field(self.region, -base, None), self.eps)

    def with_bc(self, bc) -> "GibbsSpec":
        return GibbsSpec(self.region, self.T, bc, self.field, self.eps)


@dataclass(frozen=True)
class CouplingTables:
    """Index arrays for one region, shared by the oracle and the samplers."""

    region: Region
    int_int: np.ndarray     # (m, 2) interior indices
    int_bnd: np.ndarray     # (k, 2) interior index, boundary index
    bnd_bnd: np.ndarray     # (r, 2) boundary indices
    int_int_pts: np.ndarray
    int_bnd_pts: np.ndarray
    bnd_bnd_pts: np.ndarray
    sticking_pts: np.ndarray


_tables_cache: dict = {}


def coupling_tables(region: Region) -> CouplingTables:
    key = (region.kind, region.params, region.center)
    if key in _tables_cache:
        return _tables_cache[key]
    edges = region_edges(region)
    ii = region.interior_index()
    bi = region.boundary_index()

    def pairs(arr, idx_a, idx_b):
        out = np.zeros((len(arr), 2), dtype=np.int32)
        for k, (p, q) in enumerate(arr.tolist()):
            out[k, 0] = idx_a[tuple(p)]
            out[k, 1] = idx_b[tuple(q)]
        return out

    tables = CouplingTables(
        region=region,
        int_int=pairs(edges["int_int"], ii, ii),
        int_bnd=pairs(edges["int_bnd"], ii, bi),
        bnd_bnd=pairs(edges["bnd_bnd"], bi, bi),
        int_int_pts=edges["int_int"],
        int_bnd_pts=edges["int_bnd"],
        bnd_bnd_pts=edges["bnd_bnd"],
        sticking_pts=edges["sticking"],
    )
    _tables_cache[key] = tables
    return tables


def local_couplings(spec: GibbsSpec) -> np.ndarray:
    """b_i + eps*h_i: the effective single-site field on each interior vertex."""
    tables = coupling_tables(spec.region)
    xi = spec.xi()
    b = np.zeros(spec.region.n_interior)
    for i, bnd in tables.int_bnd.tolist():
        b[i] += xi[bnd]
    return b + spec.field_values()
