"""Chaos-expansion evaluators around the zero-field critical measure.

The partition ratio with and without disorder expands in tanh(eps h) factors
with k-point correlations of the zero-field measure as coefficients:

    Z(eps h) / (Z(0) prod_v cosh(eps h_v / T)) = sum_k Phi_k(h),
    Phi_k(h) = sum_{|I|=k} <sigma^I>_0 prod_{v in I} tanh(eps h_v / T).

(The Gibbs weight carries the field as eps h sigma / T, so every field factor
enters through eps h / T; the identity below is exact only in this form.)

Phi_k is an elementary symmetric polynomial in the per-site variables
sigma_v tanh(eps h_v), so all orders come from one O(n k 2^n) sweep over the
enumerated configurations.  Coefficients come only from the oracle; this
module verifies identities, it does not estimate.
"""

from __future__ import annotations

import math

import numpy as np

from .lattice import Region
from .model import GibbsSpec, SpecError
from .oracle import OracleError, VertexModel

COMBO_CAP = 2_000_000
SWEEP_SITE_CAP = 25


def _require_zero_field(spec: GibbsSpec):
    if spec.eps != 0.0 or (spec.field is not None and np.any(spec.field.values != 0.0)):
        raise SpecError("expansion coefficients come from the zero-field measure; pass eps=0")


def _tanh_factors(spec: GibbsSpec, field, eps: float) -> np.ndarray:
    h = field.values if field is not None else np.zeros(spec.region.n_interior)
    return np.tanh(eps * h / spec.T)


def symmetric_sums(vm: VertexModel, t: np.ndarray, k_max: int) -> np.ndarray:
    """E[e_k(sigma_1 t_1, ..., sigma_n t_n)] for k = 0..k_max."""
    n = vm.n
    nconf = len(vm.probs)
    e = np.zeros((k_max + 1, nconf))
    e[0] = 1.0
    for i in range(n):
        x = vm.spins[:, i] * t[i]
        for k in range(min(i + 1, k_max), 0, -1):
            e[k] += e[k - 1] * x
    return e @ vm.probs


def phi_k(spec: GibbsSpec, field, eps: float, k: int) -> float:
    """Phi_k = sum over |I|=k of <sigma^I>_0 prod tanh(eps h), exact."""
    _require_zero_field(spec)
    vm = VertexModel(spec)
    if math.comb(vm.n, k) > COMBO_CAP:
        raise OracleError(f"order {k} exceeds the combinatorial cap on {vm.n} sites")
    t = _tanh_factors(spec, field, eps)
    return float(symmetric_sums(vm, t, k)[k])


def phi_all(spec: GibbsSpec, field, eps: float) -> np.ndarray:
    """All expansion orders Phi_0..Phi_n at once."""
    _require_zero_field(spec)
    vm = VertexModel(spec)
    t = _tanh_factors(spec, field, eps)
    return symmetric_sums(vm, t, vm.n)


def exact_partition_ratio(spec: GibbsSpec, field, eps: float) -> float:
    """Z(eps h) / (Z(0) prod cosh(eps h_v)), from two exact partition sums."""
    _require_zero_field(spec)
    with_field = GibbsSpec(spec.region, spec.T, spec.bc, field, eps)
    log0 = VertexModel(spec).logZ
    logh = VertexModel(with_field).logZ
    h = field.values if field is not None else np.zeros(spec.region.n_interior)
    return float(np.exp(logh - log0 - np.sum(np.log(np.cosh(eps * h / spec.T)))))


def z_ratio_expansion(spec: GibbsSpec, field, eps: float, k_max: int):
    """(truncated sum, exact ratio, tail)."""
    phis = phi_all(spec, field, eps)
    k_max = min(k_max, len(phis) - 1)
    truncated = float(np.sum(phis[: k_max + 1]))
    exact = exact_partition_ratio(spec, field, eps)
    return truncated, exact, exact - truncated


def bracket(spec: GibbsSpec, field, eps: float, with_origin=None) -> float:
    """<[sigma_o] prod_v (1 + sigma_v tanh(eps h_v))>_0, optionally with a
    sigma factor at `with_origin`."""
    _require_zero_field(spec)
    vm = VertexModel(spec)
    t = _tanh_factors(spec, field, eps)
    prod = np.ones(len(vm.probs))
    for i in range(vm.n):
        prod = prod * (1.0 + vm.spins[:, i] * t[i])
    if with_origin is not None:
        idx = spec.region.interior_index()
        prod = prod * vm.spins[:, idx[tuple(int(x) for x in with_origin)]]
    return float(vm.expectation(prod))


def boundary_influence_expansion(region: Region, T: float, field, eps: float, v=(0, 0)):
    """Numerator and denominators of the two-copy expansion of the boundary
    influence, plus the directly-computed difference of spin averages.

    numerator = A+ B- - B+ A- with A = <sigma_v prod(1+sigma tanh)>_0 and
    B = <prod(1+sigma tanh)>_0; the identity states numerator equals
    (<sigma_v>+_eps - <sigma_v>-_eps) * B+ B-.
    """
    plus0 = GibbsSpec(region, T, "+")
    minus0 = GibbsSpec(region, T, "-")
    a_p = bracket(plus0, field, eps, with_origin=v)
    a_m = bracket(minus0, field, eps, with_origin=v)
    b_p = bracket(plus0, field, eps)
    b_m = bracket(minus0, field, eps)
    numerator = a_p * b_m - b_p * a_m
    from .oracle import exact_spin_average

    diff = (
        exact_spin_average(GibbsSpec(region, T, "+", field, eps), v)
        - exact_spin_average(GibbsSpec(region, T, "-", field, eps), v)
    )
    return numerator, diff * b_p * b_m, (b_p, b_m)


# ---------------------------------------------------------------------------
# k-point bound weights


def _linf(a, b) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _dist_to_set(x, pts) -> int:
    return min(_linf(x, p) for p in pts)


def f_weight(points, region: Region) -> float:
    """F(I) = prod_{x in I} dist(x, boundary(R) union I minus x)^{-1/4}."""
    pts = [tuple(int(c) for c in p) for p in np.asarray(points).reshape(-1, 2)]
    if region.n_vertices == 0:
        raise SpecError("empty region")
    bset = [tuple(p) for p in region.boundary.tolist()]
    total = 1.0
    for i, x in enumerate(pts):
        others = [p for j, p in enumerate(pts) if j != i]
        d = _dist_to_set(x, bset + others)
        if d <= 0:
            raise SpecError(f"point {x} touches the boundary")
        total *= d ** (-0.25)
    return total


def f_rect_weight(points_i, points_j, rect: Region, inner: Region) -> float:
    """F_R(I, J) with d(x) = min(dist to boundary of R, dist to boundary of
    R', half the gap to the nearest other point) - 1, floored at 1."""
    pi = [tuple(int(c) for c in p) for p in np.asarray(points_i).reshape(-1, 2)]
    pj = [tuple(int(c) for c in p) for p in np.asarray(points_j).reshape(-1, 2)]
    border_out = [tuple(p) for p in rect.boundary.tolist()]
    border_in = [tuple(p) for p in inner.boundary.tolist()]
    allpts = pi + pj
    total = 1.0
    for x in allpts:
        terms = [_dist_to_set(x, border_out), _dist_to_set(x, border_in)]
        others = [p for p in allpts if p != x]
        if others:
            terms.append(0.5 * _dist_to_set(x, others))
        d = min(terms) - 1.0
        total *= max(d, 1.0) ** (-0.25)
    return total


def f_weight_sum(region: Region, k: int) -> float:
    """sum over |I| = k of F(I)^2 (interior point sets), exact enumeration."""
    from itertools import combinations

    interior = [tuple(p) for p in region.interior.tolist()]
    if len(interior) > SWEEP_SITE_CAP:
        raise OracleError(f"F-weight sweep capped at {SWEEP_SITE_CAP} interior sites")
    if math.comb(len(interior), k) > COMBO_CAP:
        raise OracleError("combinatorial cap exceeded")
    return float(sum(f_weight(list(c), region) ** 2 for c in combinations(interior, k)))


def hstar_membership(field, eps: float, rect: Region, side: str, T: float):
    """Membership in the good-field collection for the partition bracket:
    |<prod(1 + sigma tanh(eps h))>^side| <= 1 + sqrt(eps M^{7/8}), M the short
    half-side.  Returns (member, slack, bracket value)."""
    if rect.kind == "rect":
        m_short = min(rect.params)
    elif rect.kind == "box":
        m_short = rect.params[0]
    else:
        raise SpecError("hstar membership needs a rectangle or box")
    spec0 = GibbsSpec(rect, T, "+" if side == "plus" else "-")
    val = bracket(spec0, field, eps)
    threshold = 1.0 + math.sqrt(eps * m_short ** (7.0 / 8.0))
    return bool(abs(val) <= threshold), threshold - abs(val), val
