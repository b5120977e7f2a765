"""Noise channels: construction, push-forward, privacy and dominance
diagnostics, and the CSV round trip."""

import math

import numpy as np
import pytest

from tvdro import (
    BracketingError,
    DegenerateSupportError,
    DiscreteDistribution,
    NoiseChannel,
    Support,
    SupportMismatchError,
    dominance_report,
    dump_channel_csv,
    grid_support,
    identity_channel,
    ldp_channel,
    load_channel_csv,
    pairwise_distances,
    push_forward,
    sample,
    transmit,
    tv_distance,
    udd_threshold,
    verify_ldp,
)

TWO_LN_TWO = 2.0 * math.log(2.0)


def dirichlet_dist(sup, rng):
    return DiscreteDistribution(sup, rng.dirichlet(np.ones(len(sup))))


def test_channel_shape_and_column_sums():
    sup2, sup3 = Support([0, 1]), Support([0, 1, 2])
    with pytest.raises(SupportMismatchError):
        NoiseChannel(sup2, sup3, np.eye(2))
    with pytest.raises(ValueError):
        NoiseChannel(sup2, sup2, np.array([[0.9, 0.3], [0.3, 0.7]]))
    with pytest.raises(ValueError):
        NoiseChannel(sup2, sup2, np.array([[1.1, 0.1], [-0.1, 0.9]]))


def test_channel_renormalizes_tiny_column_drift():
    sup = Support([0, 1])
    m = np.array([[0.7, 0.2], [0.3, 0.8 + 5e-10]])
    ch = NoiseChannel(sup, sup, m)
    assert np.allclose(ch.matrix.sum(axis=0), 1.0, atol=1e-15)


def test_push_forward_matches_matvec():
    rng = np.random.default_rng(3)
    sup = Support(np.arange(4))
    ch = ldp_channel(sup, 1.5)
    p = dirichlet_dist(sup, rng)
    out = push_forward(ch, p)
    assert np.allclose(out.mass, ch.matrix @ p.mass, atol=1e-15)
    with pytest.raises(SupportMismatchError):
        push_forward(ch, dirichlet_dist(Support(np.arange(5)), rng))


def test_identity_channel_is_noop():
    sup = grid_support([(1, 3), (1, 2)])
    ch = identity_channel(sup)
    p = DiscreteDistribution(sup, np.full(6, 1 / 6))
    assert np.allclose(push_forward(ch, p).mass, p.mass, rtol=0, atol=1e-15)
    s = sample(p, 50, 11)
    assert np.array_equal(transmit(ch, s, 12).indices, s.indices)


def test_transmit_deterministic_and_support_checked():
    sup = Support(np.arange(3))
    ch = ldp_channel(sup, 2.0)
    p = DiscreteDistribution(sup, np.array([0.5, 0.3, 0.2]))
    s = sample(p, 400, 5)
    a = transmit(ch, s, 9)
    b = transmit(ch, s, 9)
    assert np.array_equal(a.indices, b.indices)
    assert a.support == ch.output_support
    with pytest.raises(SupportMismatchError):
        transmit(ch, sample(DiscreteDistribution(Support(np.arange(4)),
                                                 np.full(4, 0.25)), 10, 0), 1)


def test_transmit_law_matches_push_forward():
    """Empirical law of transmitted draws approaches O * p."""
    sup = Support(np.arange(3))
    ch = ldp_channel(sup, 1.0)
    p = DiscreteDistribution(sup, np.array([0.6, 0.3, 0.1]))
    s = sample(p, 200_000, 21)
    from tvdro import empirical_distribution

    emp = empirical_distribution(transmit(ch, s, 22))
    assert tv_distance(emp, push_forward(ch, p)) < 0.01


def test_pairwise_distance_norms():
    sup = grid_support([(0, 1), (0, 1)])
    d2 = pairwise_distances(sup, "euclidean")
    d1 = pairwise_distances(sup, "l1")
    dinf = pairwise_distances(sup, "linf")
    i, j = sup.index_of((0, 0)), sup.index_of((1, 1))
    assert d2[i, j] == pytest.approx(math.sqrt(2.0))
    assert d1[i, j] == pytest.approx(2.0)
    assert dinf[i, j] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        pairwise_distances(sup, "cosine")


def test_ldp_two_point_closed_form():
    # eps=2 on {0, 1}: diagonal 1/(1+e^-1), off-diagonal 1/(1+e)
    ch = ldp_channel(Support([0, 1]), 2.0)
    assert ch.matrix[0, 0] == pytest.approx(0.7310585786300049, abs=1e-15)
    assert ch.matrix[1, 0] == pytest.approx(0.2689414213699951, abs=1e-15)


def test_ldp_limits():
    sup = Support(np.arange(5))
    uniform = ldp_channel(sup, 0.0)
    assert np.allclose(uniform.matrix, 0.2, atol=1e-15)
    ident = ldp_channel(sup, math.inf)
    assert np.array_equal(ident.matrix, np.eye(5))
    with pytest.raises(ValueError):
        ldp_channel(sup, -0.5)
    with pytest.raises(ValueError):
        ldp_channel(sup, math.nan)
    with pytest.raises(DegenerateSupportError):
        ldp_channel(Support([7]), 1.0)


def test_ldp_channels_satisfy_their_privacy_level():
    rng = np.random.default_rng(902)
    for _ in range(20):
        dim = int(rng.integers(1, 3))
        axes = [(1, int(rng.integers(2, 4))) for _ in range(dim)]
        sup = grid_support(axes)
        if len(sup) == 1:
            continue
        eps = float(rng.choice([0.1, 1.0, 3.0, 10.0]))
        rep = verify_ldp(ldp_channel(sup, eps), eps)
        assert rep.holds
        assert rep.worst_ratio <= math.exp(eps) * (1.0 + 1e-9)


def test_verify_ldp_rejects_too_strict_level():
    # the decay construction at eps=2 on two points attains ratio e^(eps/2),
    # so it also passes level 1 but must fail anything below that
    ch = ldp_channel(Support([0, 1]), 2.0)
    assert verify_ldp(ch, 1.0).holds
    rep = verify_ldp(ch, 0.9)
    assert not rep.holds
    assert rep.worst_ratio == pytest.approx(math.e, rel=1e-12)


def test_verify_ldp_zero_entries_are_non_private():
    sup = Support([0, 1])
    ch = NoiseChannel(sup, sup, np.array([[1.0, 0.5], [0.0, 0.5]]))
    rep = verify_ldp(ch, 100.0)
    assert not rep.holds
    assert math.isinf(rep.worst_ratio)


def test_dominance_hand_example():
    # O = [[0.9, 0.1], [0.1, 0.9]]: min diag 0.9 > 2 * 0.1, c0 = 1/0.7
    sup = Support([0, 1])
    ch = NoiseChannel(sup, sup, np.array([[0.9, 0.1], [0.1, 0.9]]))
    rep = dominance_report(ch)
    assert rep.cardinality == 2
    assert rep.min_diagonal == pytest.approx(0.9)
    assert rep.max_off_diagonal == pytest.approx(0.1)
    assert rep.is_udd
    assert rep.contraction_constant == pytest.approx(1.0 / 0.7, rel=1e-12)


def test_dominance_failure_has_no_constant():
    sup = Support([0, 1, 2])
    ch = ldp_channel(sup, 0.5)
    rep = dominance_report(ch)
    assert not rep.is_udd
    assert rep.contraction_constant is None


def test_dominance_needs_square_channel():
    a, b = Support([0, 1]), Support([0, 1, 2])
    m = np.full((3, 2), 1 / 3)
    with pytest.raises(SupportMismatchError):
        dominance_report(NoiseChannel(a, b, m))


def test_contraction_bound_random():
    """d_TV(O*p, O*q) <= d_TV(p, q), with equality for the identity."""
    rng = np.random.default_rng(5150)
    for _ in range(100):
        k = int(rng.integers(2, 7))
        sup = Support(np.arange(k))
        ch = ldp_channel(sup, float(rng.uniform(0.0, 8.0)))
        p, q = dirichlet_dist(sup, rng), dirichlet_dist(sup, rng)
        assert tv_distance(push_forward(ch, p), push_forward(ch, q)) <= (
            tv_distance(p, q) + 1e-12
        )


def test_udd_pullback_bound_random():
    """Under dominance the push-forward shrinks TV by at most c0."""
    rng = np.random.default_rng(246)
    done = 0
    while done < 60:
        k = int(rng.integers(2, 7))
        sup = Support(np.arange(k))
        ch = ldp_channel(sup, float(rng.uniform(5.0, 30.0)))
        rep = dominance_report(ch)
        if not rep.is_udd:
            continue
        p, q = dirichlet_dist(sup, rng), dirichlet_dist(sup, rng)
        lhs = tv_distance(p, q)
        rhs = rep.contraction_constant * tv_distance(push_forward(ch, p), push_forward(ch, q))
        assert lhs <= rhs + 1e-12
        done += 1


def test_udd_threshold_two_point_closed_form():
    # threshold solves diag = 2 * offdiag with distance ratio 1/2 in the
    # exponent, giving exactly 2 ln 2
    th = udd_threshold(Support([0, 1]), 0.0, 10.0, tol=1e-8)
    assert th == pytest.approx(TWO_LN_TWO, abs=1e-5)
    assert not dominance_report(ldp_channel(Support([0, 1]), TWO_LN_TWO)).is_udd
    assert dominance_report(ldp_channel(Support([0, 1]), TWO_LN_TWO + 1e-6)).is_udd


def test_udd_threshold_norm_invariant_in_one_dim():
    sup = Support([0, 1, 2])
    values = [udd_threshold(sup, 0.0, 50.0, tol=1e-7, norm=n)
              for n in ("euclidean", "l1", "linf")]
    for v in values:
        assert v == pytest.approx(4.952905280515552, abs=1e-5)


def test_udd_threshold_requires_bracketing():
    sup = Support([0, 1])
    with pytest.raises(BracketingError):
        udd_threshold(sup, 5.0, 10.0)  # dominance already holds at lo
    with pytest.raises(BracketingError):
        udd_threshold(sup, 0.0, 1.0)  # still fails at hi
    with pytest.raises(ValueError):
        udd_threshold(sup, 3.0, 2.0)
    with pytest.raises(ValueError):
        udd_threshold(sup, 0.0, 5.0, tol=0.0)


def test_udd_threshold_is_a_boundary():
    """Dominance fails just below the bisected level and holds just above."""
    sup = grid_support([(1, 3), (1, 3)])
    th = udd_threshold(sup, 0.0, 300.0, tol=1e-7)
    assert not dominance_report(ldp_channel(sup, th - 1e-3)).is_udd
    assert dominance_report(ldp_channel(sup, th + 1e-3)).is_udd


def test_channel_csv_round_trip(tmp_path):
    rng = np.random.default_rng(42)
    sup = grid_support([(1, 2), (1, 3)])
    ch = ldp_channel(sup, 2.5)
    path = tmp_path / "chan.csv"
    dump_channel_csv(ch, path)
    back = load_channel_csv(path)
    assert back.input_support == ch.input_support
    assert back.output_support == ch.output_support
    assert np.allclose(back.matrix, ch.matrix, atol=1e-15)


def test_channel_csv_rejects_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("nope,1\n0,1.0\n")
    with pytest.raises(ValueError):
        load_channel_csv(path)
    path.write_text("point,1\n0,0.5,0.5\n")
    with pytest.raises(ValueError):
        load_channel_csv(path)
    path.write_text("")
    with pytest.raises(ValueError):
        load_channel_csv(path)
