import math

import numpy as np
import pytest

from rfim2d import oracle
from rfim2d.disorder import Seed, sample_field, zero_field
from rfim2d.lattice import build_region
from rfim2d.model import GibbsSpec, T_C, coupling_tables, fk_p
from rfim2d.oracle import (EventSpec, OracleError, PairSpec, VertexModel,
                           exact_con_distribution, exact_correlation,
                           exact_pair_event_prob, exact_partition,
                           exact_spin_average, exact_surface_tension,
                           exact_wired_wired_connection)

BOX1 = build_region("box", 1)
BOX2 = build_region("box", 2)
ANN13 = build_region("annulus", (1, 3))


def test_tc_constant():
    assert T_C == 2.0 / math.log(1.0 + math.sqrt(2.0))
    assert abs(fk_p(T_C) - math.sqrt(2) / (1 + math.sqrt(2))) < 1e-15


def test_partition_single_spin_closed_forms():
    spec = GibbsSpec(BOX1, T_C, "+")
    assert exact_partition(spec) == pytest.approx(math.exp(4 / T_C) + math.exp(-4 / T_C), rel=1e-14)
    f = sample_field(BOX1, Seed(42))
    h = f.values[0]
    spec_h = GibbsSpec(BOX1, T_C, "+", f, 0.7)
    expected = math.exp((4 + 0.7 * h) / T_C) + math.exp(-(4 + 0.7 * h) / T_C)
    assert exact_partition(spec_h) == pytest.approx(expected, rel=1e-14)


def test_partition_cap():
    big = build_region("box", 4)   # 49 interior spins
    with pytest.raises(OracleError, match="capped"):
        exact_partition(GibbsSpec(big, T_C, "+"))


def test_spin_average_closed_form_and_antisymmetry():
    assert exact_spin_average(GibbsSpec(BOX1, T_C, "+"), (0, 0)) == pytest.approx(
        math.tanh(4 / T_C), abs=1e-14)
    assert exact_spin_average(GibbsSpec(BOX1, T_C, "-"), (0, 0)) == pytest.approx(
        -math.tanh(4 / T_C), abs=1e-14)
    f = sample_field(BOX2, Seed(1))
    spec = GibbsSpec(BOX2, T_C, "+", f, 0.9)
    assert exact_spin_average(spec, (0, 0)) == pytest.approx(
        -exact_spin_average(spec.flipped(), (0, 0)), abs=1e-12)


def test_spin_average_rejects_boundary_vertex():
    with pytest.raises(OracleError):
        exact_spin_average(GibbsSpec(BOX1, T_C, "+"), (1, 1))


def test_correlation_empty_and_free_symmetry():
    spec = GibbsSpec(BOX2, T_C, "+")
    assert exact_correlation(spec, np.zeros((0, 2))) == 1.0
    # zero-field global flip symmetry: <s_u> is antisymmetric under bc flip
    m_plus = exact_correlation(GibbsSpec(BOX2, T_C, "+"), [(1, 1)])
    m_minus = exact_correlation(GibbsSpec(BOX2, T_C, "-"), [(1, 1)])
    assert m_plus == pytest.approx(-m_minus, abs=1e-14)


def test_truncated_correlation_vs_fk_bound():
    # truncated <s_u; s_v> >= P(u <-> v not<-> boundary) for every tested xi
    rng = np.random.default_rng(2)
    for _ in range(4):
        xi = rng.choice([-1, 1], size=16)
        spec = GibbsSpec(BOX2, T_C, xi)
        u, v = (0, 0), (1, 1)
        trunc = exact_correlation(spec, [u, v], truncated=True)
        fkp = oracle.fk_event_prob(spec, EventSpec("connect_avoid_boundary", (u, v)))
        assert trunc >= fkp - 1e-12


def test_extended_edge_marginals():
    # disagreeing endpoints force sigma_e = 0; agreeing open with prob p
    spec = GibbsSpec(BOX1, T_C, "+")
    t = coupling_tables(BOX1)
    vm = VertexModel(spec)
    for k, (i, b) in enumerate(t.int_bnd.tolist()):
        vals = oracle.extended_event_values(spec, EventSpec("edge_open_bnd", (k,)), vm)
        prob = vm.expectation(vals)
        # P(open) = p * P(s_i = xi_b)
        p_agree = vm.expectation((vm.spins[:, i] == 1).astype(float))
        assert prob == pytest.approx(spec.p * p_agree, abs=1e-14)


def test_fk_one_arm_matches_extended_same_sign_path():
    f = sample_field(BOX2, Seed(3))
    spec = GibbsSpec(BOX2, T_C, "+", f, 0.5)
    ev = EventSpec("one_arm", ((0, 0),))
    a = oracle.fk_event_prob(spec, ev)
    b = oracle.extended_event_prob(spec, ev)
    assert a == pytest.approx(b, abs=1e-10)


def test_pair_specs_must_share_field():
    fa = sample_field(BOX1, Seed(1))
    fb = sample_field(BOX1, Seed(2))
    with pytest.raises(Exception):
        PairSpec(GibbsSpec(BOX1, T_C, "+", fa, 1.0), GibbsSpec(BOX1, T_C, "-", fb, 1.0))


def test_disagreement_representation_box1_fields():
    for k in range(3):
        f = sample_field(BOX1, Seed(50 + k))
        for eps in (0.0, 0.3, 3.0):
            pair = PairSpec(GibbsSpec(BOX1, T_C, "+", f, eps),
                            GibbsSpec(BOX1, T_C, "-", f, eps))
            lhs, rhs = oracle.exact_disagreement_representation(pair)
            assert lhs == pytest.approx(rhs, abs=1e-10)


def test_pair_event_pinned_by_huge_field():
    # eps -> large with huge positive field everywhere: both chains pinned +
    from rfim2d.disorder import Field
    f = Field(BOX2, np.full(9, 10.0), None)
    pair = PairSpec(GibbsSpec(BOX2, T_C, "+", f, 10.0),
                    GibbsSpec(BOX2, T_C, "-", f, 10.0))
    lhs, rhs = oracle.exact_disagreement_representation(pair)
    assert lhs < 1e-6
    assert rhs < 1e-6


def test_surface_tension_identity_annulus13():
    f = sample_field(ANN13, Seed(12))
    for eps in (0.0, 1.0):
        st = exact_surface_tension(ANN13, ANN13.outer_boundary, ANN13.inner_boundary,
                                   f, eps, T_C)
        dist = exact_con_distribution(ANN13, f, eps, T_C)
        assert st == pytest.approx(-T_C * math.log(dist[0]), abs=1e-8)


def test_surface_tension_nonnegative_and_symmetric():
    z = zero_field(ANN13)
    st = exact_surface_tension(ANN13, ANN13.outer_boundary, ANN13.inner_boundary, z, 0.0, T_C)
    assert st >= 0.0
    # invariance under global field sign flip combined with swapping + and -
    f = sample_field(ANN13, Seed(9))
    from rfim2d.disorder import Field
    neg = Field(ANN13, -f.values, None)
    a = exact_surface_tension(ANN13, ANN13.outer_boundary, ANN13.inner_boundary, f, 1.3, T_C)
    b = exact_surface_tension(ANN13, ANN13.outer_boundary, ANN13.inner_boundary, neg, 1.3, T_C)
    assert a == pytest.approx(b, abs=1e-10)


def test_surface_tension_overlap_rejected():
    f = zero_field(ANN13)
    with pytest.raises(OracleError):
        exact_surface_tension(ANN13, ANN13.boundary, ANN13.inner_boundary, f, 0.0, T_C)


def test_wired_wired_connection_bounds():
    phi = exact_wired_wired_connection(ANN13, T_C)
    assert 0.0 < phi < 1.0
    disc = oracle.exact_wired_wired_disconnection(ANN13, T_C)
    assert disc == pytest.approx(1.0 - phi, rel=1e-6)


def test_lemma43_exact():
    disc = oracle.exact_wired_wired_disconnection(ANN13, T_C)
    floor = (disc / (2.0 - disc)) ** 2
    for k in range(3):
        f = sample_field(ANN13, Seed(70 + k))
        d0 = exact_con_distribution(ANN13, f, 1.0, T_C)[0]
        assert d0 >= floor * (1 - 1e-9)


def test_bk_exact_ring_uniform():
    z = zero_field(ANN13)
    for bi in (("+", "-"), ("-", "+"), ("+", "+")):
        for bo in (("+", "-"), ("-", "+")):
            dist = exact_con_distribution(ANN13, z, 0.0, T_C, bi, bo)
            a, d1 = float(dist[0]), float(dist[1])
            assert a * (1 - a) - d1 <= 1e-10    # P(Con2) <= P(Con)^2


def test_con2_implies_con_probabilistically():
    z = zero_field(ANN13)
    dist = exact_con_distribution(ANN13, z, 0.0, T_C)
    assert dist[2] <= dist[1] + dist[2] + 1e-15


def test_pair_enumeration_cap():
    big = build_region("box", 4)
    pair = PairSpec(GibbsSpec(big, T_C, "+"), GibbsSpec(big, T_C, "-"))
    with pytest.raises(OracleError):
        oracle.pre_disagreement_weight_table(pair)
