"""Supports, probability vectors, the TV metric, and seeded sampling."""

import numpy as np
import pytest

from tvdro import (
    DegenerateSupportError,
    DiscreteDistribution,
    SampleSet,
    Support,
    SupportMismatchError,
    empirical_distribution,
    expected_value,
    grid_support,
    sample,
    tv_distance,
)


def test_support_scalar_points_become_column():
    sup = Support([3, 1, 2])
    assert len(sup) == 3
    assert sup.dim == 1
    assert sup.points.shape == (3, 1)


def test_support_rejects_duplicates_and_non_integers():
    with pytest.raises(DegenerateSupportError):
        Support([[1, 2], [1, 2]])
    with pytest.raises(DegenerateSupportError):
        Support([0.5, 1.0])
    with pytest.raises(DegenerateSupportError):
        Support(np.zeros((0, 2)))
    with pytest.raises(DegenerateSupportError):
        Support([np.nan, 1.0])


def test_support_accepts_integer_valued_floats():
    sup = Support(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert sup.points.dtype == np.int64


def test_support_equality_ignores_labels_but_not_order():
    a = Support([0, 1], labels=("x", "y"))
    b = Support([0, 1])
    c = Support([1, 0])
    assert a == b
    assert hash(a) == hash(b)
    assert a != c


def test_support_index_of():
    sup = grid_support([(1, 2), (1, 3)])
    assert sup.index_of((1, 1)) == 0
    assert sup.index_of((1, 2)) == 1  # last axis fastest
    assert sup.index_of((2, 3)) == len(sup) - 1
    with pytest.raises(KeyError):
        sup.index_of((0, 0))
    with pytest.raises(KeyError):
        sup.index_of((1, 1, 1))


def test_grid_support_shape_and_order():
    sup = grid_support([(1, 5), (1, 5), (1, 7)])
    assert len(sup) == 175
    assert sup.dim == 3
    # row-major: last coordinate increments first
    assert sup.points[0].tolist() == [1, 1, 1]
    assert sup.points[1].tolist() == [1, 1, 2]
    assert sup.points[7].tolist() == [1, 2, 1]


def test_grid_support_rejects_empty_axis():
    with pytest.raises(DegenerateSupportError):
        grid_support([(2, 1)])


def test_distribution_normalizes_and_freezes():
    sup = Support([0, 1, 2])
    p = DiscreteDistribution(sup, np.array([0.2, 0.3, 0.5 + 4e-10]))
    assert p.mass.sum() == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        p.mass[0] = 0.9  # the vector is read-only


def test_distribution_rejects_bad_mass():
    sup = Support([0, 1])
    with pytest.raises(ValueError):
        DiscreteDistribution(sup, np.array([0.6, 0.6]))
    with pytest.raises(ValueError):
        DiscreteDistribution(sup, np.array([1.5, -0.5]))
    with pytest.raises(ValueError):
        DiscreteDistribution(sup, np.array([np.inf, 0.0]))
    with pytest.raises(SupportMismatchError):
        DiscreteDistribution(sup, np.array([1.0]))


def test_distribution_clips_solver_dust():
    sup = Support([0, 1])
    p = DiscreteDistribution(sup, np.array([1.0, -1e-13]))
    assert p.mass[1] == 0.0


def test_tv_hand_value():
    # 0.5 * (|0.5-0.7| + |0.5-0.3|) = 0.2
    sup = Support([0, 1])
    p = DiscreteDistribution(sup, np.array([0.5, 0.5]))
    q = DiscreteDistribution(sup, np.array([0.7, 0.3]))
    assert tv_distance(p, q) == pytest.approx(0.2, abs=1e-15)


def test_tv_requires_common_support():
    p = DiscreteDistribution(Support([0, 1]), np.array([0.5, 0.5]))
    q = DiscreteDistribution(Support([0, 2]), np.array([0.5, 0.5]))
    with pytest.raises(SupportMismatchError):
        tv_distance(p, q)


def test_tv_metric_axioms_random():
    """Identity, symmetry, triangle inequality, and the [0, 1] range."""
    rng = np.random.default_rng(1234)
    sup = Support(np.arange(6))
    for _ in range(200):
        p, q, r = (
            DiscreteDistribution(sup, rng.dirichlet(np.full(6, 0.4)))
            for _ in range(3)
        )
        dpq = tv_distance(p, q)
        assert 0.0 <= dpq <= 1.0
        assert dpq == pytest.approx(tv_distance(q, p), abs=1e-15)
        assert tv_distance(p, p) == 0.0
        assert dpq <= tv_distance(p, r) + tv_distance(r, q) + 1e-12


def test_tv_equals_max_event_discrepancy():
    # TV is the largest gap in probability assigned to any event; on a
    # finite space the maximizing event collects the atoms where p > q.
    rng = np.random.default_rng(77)
    sup = Support(np.arange(5))
    for _ in range(50):
        p = DiscreteDistribution(sup, rng.dirichlet(np.ones(5)))
        q = DiscreteDistribution(sup, rng.dirichlet(np.ones(5)))
        gap = float(np.sum((p.mass - q.mass)[p.mass > q.mass]))
        assert tv_distance(p, q) == pytest.approx(gap, abs=1e-12)


def test_expected_value_alignment_and_validation():
    sup = Support([0, 1, 2])
    p = DiscreteDistribution(sup, np.array([0.5, 0.3, 0.2]))
    assert expected_value(p, [0.0, 1.0, 2.0]) == pytest.approx(0.7)
    with pytest.raises(SupportMismatchError):
        expected_value(p, [0.0, 1.0])
    with pytest.raises(ValueError):
        expected_value(p, [0.0, np.nan, 1.0])


def test_sample_deterministic_for_fixed_seed():
    p = DiscreteDistribution(Support([0, 1, 2]), np.array([0.5, 0.3, 0.2]))
    a = sample(p, 500, 42)
    b = sample(p, 500, 42)
    c = sample(p, 500, 43)
    assert np.array_equal(a.indices, b.indices)
    assert not np.array_equal(a.indices, c.indices)


def test_sample_rejects_empty_request():
    p = DiscreteDistribution(Support([0, 1]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        sample(p, 0, 1)


def test_sample_never_draws_zero_mass_atoms():
    p = DiscreteDistribution(Support([0, 1, 2]), np.array([0.5, 0.0, 0.5]))
    s = sample(p, 2000, 7)
    assert not np.any(s.indices == 1)


def test_empirical_distribution_counts():
    sup = Support([0, 1, 2])
    s = SampleSet(sup, np.array([0, 0, 2, 2, 2, 1]))
    emp = empirical_distribution(s)
    assert np.allclose(emp.mass, [2 / 6, 1 / 6, 3 / 6])


def test_empirical_concentrates_with_n():
    """Larger samples sit closer to the truth in TV, seed by seed."""
    rng = np.random.default_rng(5)
    sup = Support(np.arange(4))
    p = DiscreteDistribution(sup, np.array([0.4, 0.3, 0.2, 0.1]))
    for seed in rng.integers(0, 2**31, size=10):
        d_small = tv_distance(empirical_distribution(sample(p, 100, int(seed))), p)
        d_large = tv_distance(empirical_distribution(sample(p, 100_000, int(seed))), p)
        assert d_large < d_small + 0.02


def test_sample_set_validation():
    sup = Support([0, 1])
    with pytest.raises(ValueError):
        SampleSet(sup, np.array([0, 5]))
    with pytest.raises(ValueError):
        SampleSet(sup, np.array([], dtype=np.int64))
    with pytest.raises(ValueError):
        SampleSet(sup, np.array([0.5]))


def test_sample_points_coordinates():
    sup = grid_support([(1, 2), (1, 2)])
    s = SampleSet(sup, np.array([0, 3]))
    assert s.points().tolist() == [[1, 1], [2, 2]]
