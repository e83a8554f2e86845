import numpy as np
import pytest
from scipy import stats

from rfim2d.disorder import (Field, Seed, flip_field, load_field,
                             recompute_vertex, sample_field, save_field,
                             zero_field)
from rfim2d.lattice import build_region


def test_determinism():
    region = build_region("box", 4)
    a = sample_field(region, Seed(123, 5))
    b = sample_field(region, Seed(123, 5))
    assert np.array_equal(a.values, b.values)


def test_distinct_paths_differ():
    region = build_region("box", 3)
    a = sample_field(region, Seed(1, 0))
    b = sample_field(region, Seed(1, 1))
    c = sample_field(region, Seed(2, 0))
    assert not np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_per_vertex_recompute():
    region = build_region("box", 3)
    seed = Seed(99, 2)
    f = sample_field(region, seed)
    for v in [(0, 0), (1, -1), (-2, 2)]:
        assert recompute_vertex(region, seed, v) == f.value_at(v)


def test_field_covers_interior_only():
    region = build_region("box", 2)
    f = sample_field(region, Seed(0))
    assert len(f.values) == region.n_interior == 9
    with pytest.raises(ValueError):
        f.value_at((2, 2))   # boundary vertex carries no field


def test_moments():
    # one vertex, 10^6 draws across replicas: mean 0 +- 0.01, variance 1 +- 0.01
    region = build_region("box", 1)
    vals = np.array([sample_field(region, Seed(7, r)).values[0] for r in range(100_000)])
    assert abs(vals.mean()) < 0.01
    assert abs(vals.var() - 1.0) < 0.01


def test_normality_ks():
    region = build_region("box", 8)
    f = sample_field(region, Seed(5))
    _, pval = stats.kstest(f.values, "norm")
    assert pval > 1e-4


def test_flip_identity_and_involution():
    region = build_region("box", 2)
    f = sample_field(region, Seed(11))
    assert np.array_equal(flip_field(f, []).values, f.values)
    a = [(0, 0), (1, 1)]
    assert np.array_equal(flip_field(flip_field(f, a), a).values, f.values)


def test_flip_single_site_region():
    region = build_region("box", 1)
    f = sample_field(region, Seed(3))
    g = flip_field(f, [(0, 0)])
    assert g.values[0] == -f.values[0]


def test_flip_outside_rejected():
    region = build_region("box", 2)
    f = sample_field(region, Seed(4))
    with pytest.raises(ValueError):
        flip_field(f, [(2, 0)])


def test_flip_distributional_symmetry():
    # law of h^A equals law of h: KS on the flipped marginal over replicas
    region = build_region("box", 1)
    a = [(0, 0)]
    flipped = np.array([flip_field(sample_field(region, Seed(21, r)), a).values[0]
                        for r in range(20_000)])
    _, pval = stats.kstest(flipped, "norm")
    assert pval > 1e-4


def test_field_file_roundtrip(tmp_path):
    region = build_region("annulus", (1, 4))
    f = sample_field(region, Seed(77, 3))
    path = tmp_path / "field.csv"
    save_field(f, path)
    g = load_field(path)
    assert np.array_equal(g.values, f.values)          # exact round-trip
    assert g.seed == f.seed
    assert g.region.params == region.params
