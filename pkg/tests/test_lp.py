"""LP engine: primal/dual worst-case routes, certificates, the grid
oracle, and the text round trip for linear programs."""

import numpy as np
import pytest

from tvdro import (
    AmbiguitySpec,
    DiscreteDistribution,
    EmptyAmbiguitySetError,
    LinearProgram,
    NoiseChannel,
    ResourceLimitError,
    Support,
    identity_channel,
    lp_from_text,
    lp_to_text,
    min_observable_distance,
    push_forward,
    solve_lp,
    tv_distance,
    worst_case_dual,
    worst_case_oracle,
    worst_case_primal,
)
from tvdro.experiments.harness import derive_seed, random_instance

CERT_SLACK = 1e-10


def canonical_spec():
    # two atoms, identity noise, fair-coin center, radius 0.2: the
    # adversary moves 0.2 of mass onto the losing atom, value 0.7
    sup = Support([0, 1])
    center = DiscreteDistribution(sup, np.array([0.5, 0.5]))
    return AmbiguitySpec(identity_channel(sup), center, 0.2), np.array([0.0, 1.0])


def assert_certificate(spec, loss, res):
    """Exact dual feasibility plus objective attainment."""
    cert = res.dual_cert
    k = len(spec.channel.input_support)
    assert np.all(cert.lam >= 0.0)
    assert np.all(cert.mu >= 0.0)
    assert cert.t >= 0.0
    assert np.all(cert.lam + cert.mu <= cert.t + CERT_SLACK)
    rows = loss + (cert.lam - cert.mu) @ spec.channel.matrix
    tol = 1e-8 * (max(1.0, float(np.max(np.abs(loss)))) + abs(res.value))
    assert np.all(rows <= cert.r + tol)
    assert cert.objective(spec) == pytest.approx(res.value, abs=tol)
    # worst-case law is feasible and attains the value
    q = res.q_star
    assert np.all(q.mass >= -1e-12)
    assert q.mass.sum() == pytest.approx(1.0, abs=1e-9)
    assert tv_distance(push_forward(spec.channel, q), spec.center) <= (
        spec.epsilon + 1e-8
    )
    assert float(loss @ q.mass) == pytest.approx(res.value, abs=tol)


def test_canonical_value_both_routes():
    spec, loss = canonical_spec()
    p = worst_case_primal(spec, loss)
    d = worst_case_dual(spec, loss)
    assert p.value == pytest.approx(0.7, abs=1e-8)
    assert d.value == pytest.approx(0.7, abs=1e-8)
    for res in (p, d):
        assert res.q_star.mass == pytest.approx([0.3, 0.7], abs=1e-6)
        assert_certificate(spec, loss, res)


def test_canonical_value_oracle_route():
    spec, loss = canonical_spec()
    # step 1e-3 puts (0.3, 0.7) on the grid, so the oracle is exact here
    assert worst_case_oracle(spec, loss, 1e-3) == pytest.approx(0.7, abs=1e-8)


def test_primal_dual_parity_random():
    for i in range(60):
        inst = random_instance(derive_seed(31, "parity", i))
        p = worst_case_primal(inst.spec, inst.loss)
        d = worst_case_dual(inst.spec, inst.loss)
        tol = 1e-8 * (1.0 + abs(d.value))
        assert abs(p.value - d.value) <= tol
        assert_certificate(inst.spec, inst.loss, p)
        assert_certificate(inst.spec, inst.loss, d)


def test_parity_survives_large_loss_scale():
    for i in range(15):
        inst = random_instance(derive_seed(77, "scale", i), epsilon=0.3)
        big = inst.loss * 3000.0
        p = worst_case_primal(inst.spec, big)
        d = worst_case_dual(inst.spec, big)
        assert abs(p.value - d.value) <= 1e-8 * (1.0 + abs(d.value))
        assert_certificate(inst.spec, big, p)
        assert_certificate(inst.spec, big, d)
        # positive homogeneity in the loss
        base = worst_case_dual(inst.spec, inst.loss).value
        assert d.value == pytest.approx(3000.0 * base, rel=1e-7, abs=1e-6)


def test_dual_dominates_grid_oracle():
    # the grid undershoots by at most max|loss| * k * step
    for i in range(25):
        inst = random_instance(
            derive_seed(13, "oracle", i), k=int(2 + i % 2), epsilon=0.3
        )
        step = 1e-3 if len(inst.spec.channel.input_support) == 2 else 1e-2
        grid = worst_case_oracle(inst.spec, inst.loss, step)
        dual = worst_case_dual(inst.spec, inst.loss).value
        slack = float(np.max(np.abs(inst.loss)))
        k = len(inst.spec.channel.input_support)
        assert dual >= grid - 1e-9
        assert dual - grid <= slack * k * step + 1e-9


def test_zero_radius_identity_is_plain_expectation():
    sup = Support([0, 1, 2])
    center = DiscreteDistribution(sup, np.array([0.6, 0.3, 0.1]))
    spec = AmbiguitySpec(identity_channel(sup), center, 0.0)
    loss = np.array([1.0, -2.0, 4.0])
    expected = float(loss @ center.mass)
    assert worst_case_dual(spec, loss).value == pytest.approx(expected, abs=1e-9)
    assert worst_case_primal(spec, loss).value == pytest.approx(expected, abs=1e-9)


def test_unit_radius_gives_max_loss():
    # TV never exceeds 1, so the ball is the whole simplex
    sup = Support([0, 1, 2])
    center = DiscreteDistribution(sup, np.array([0.8, 0.1, 0.1]))
    spec = AmbiguitySpec(identity_channel(sup), center, 1.0)
    loss = np.array([2.0, 5.0, -1.0])
    assert worst_case_dual(spec, loss).value == pytest.approx(5.0, abs=1e-8)


def test_worst_case_monotone_in_radius():
    rng = np.random.default_rng(415)
    for _ in range(20):
        inst = random_instance(int(rng.integers(1 << 30)), epsilon=0.05)
        lo = worst_case_dual(inst.spec, inst.loss).value
        wider = AmbiguitySpec(inst.spec.channel, inst.spec.center, 0.4)
        hi = worst_case_dual(wider, inst.loss).value
        assert hi >= lo - 1e-9


def test_empty_ball_raises_with_distance():
    # the only reachable observed law is (0.5, 0.5), at TV 0.5 from center
    one, two = Support([0]), Support([0, 1])
    ch = NoiseChannel(one, two, np.array([[0.5], [0.5]]))
    center = DiscreteDistribution(two, np.array([1.0, 0.0]))
    spec = AmbiguitySpec(ch, center, 0.1)
    assert min_observable_distance(spec) == pytest.approx(0.5, abs=1e-9)
    loss = np.array([3.0])
    for fn in (worst_case_primal, worst_case_dual):
        with pytest.raises(EmptyAmbiguitySetError) as exc:
            fn(spec, loss)
        assert exc.value.min_distance == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(EmptyAmbiguitySetError):
        worst_case_oracle(spec, loss, 1e-2)
    # widening past the distance makes the problem feasible again
    wide = AmbiguitySpec(ch, center, 0.5)
    assert worst_case_dual(wide, loss).value == pytest.approx(3.0, abs=1e-8)


def test_min_observable_distance_zero_when_center_reachable():
    spec, _ = canonical_spec()
    assert min_observable_distance(spec) <= 1e-10


def test_loss_validation():
    spec, _ = canonical_spec()
    with pytest.raises(ValueError):
        worst_case_dual(spec, np.array([1.0]))
    with pytest.raises(ValueError):
        worst_case_dual(spec, np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        worst_case_primal(spec, np.array([[1.0], [2.0]]))


def test_oracle_resource_caps():
    sup5 = Support(np.arange(5))
    spec5 = AmbiguitySpec(
        identity_channel(sup5), DiscreteDistribution(sup5, np.full(5, 0.2)), 0.3
    )
    with pytest.raises(ResourceLimitError):
        worst_case_oracle(spec5, np.arange(5.0), 1e-2)
    sup4 = Support(np.arange(4))
    spec4 = AmbiguitySpec(
        identity_channel(sup4), DiscreteDistribution(sup4, np.full(4, 0.25)), 0.3
    )
    with pytest.raises(ResourceLimitError):
        worst_case_oracle(spec4, np.arange(4.0), 1e-3)  # 1.7e8 grid points
    spec, loss = canonical_spec()
    with pytest.raises(ValueError):
        worst_case_oracle(spec, loss, 0.0)
    with pytest.raises(ValueError):
        worst_case_oracle(spec, loss, 1.5)


def test_solve_lp_simple_min():
    lp = LinearProgram(
        "min",
        np.array([1.0, 2.0]),
        a_ub=np.array([[-1.0, -1.0]]),
        b_ub=np.array([-1.0]),
        lower=np.zeros(2),
        upper=np.array([np.inf, np.inf]),
    )
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(1.0, abs=1e-9)
    assert sol.x == pytest.approx([1.0, 0.0], abs=1e-9)
    assert sol.dual_ineq is not None and sol.dual_ineq[0] >= 0.0
    for key in (
        "primal_infeasibility",
        "dual_infeasibility",
        "duality_gap",
        "complementary_slackness",
    ):
        assert sol.certificate[key] <= 1e-7


def test_solve_lp_sense_max():
    lp = LinearProgram(
        "max",
        np.array([1.0, 1.0]),
        a_ub=np.array([[1.0, 2.0]]),
        b_ub=np.array([2.0]),
        lower=np.zeros(2),
        upper=np.full(2, np.inf),
    )
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(2.0, abs=1e-9)


def test_solve_lp_equality_constraints():
    lp = LinearProgram(
        "min",
        np.array([0.0, 1.0, 2.0]),
        a_eq=np.array([[1.0, 1.0, 1.0]]),
        b_eq=np.array([1.0]),
        lower=np.zeros(3),
        upper=np.full(3, np.inf),
    )
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(0.0, abs=1e-12)
    assert sol.dual_eq is not None and len(sol.dual_eq) == 1


def test_solve_lp_detects_infeasible_and_unbounded():
    infeasible = LinearProgram(
        "min",
        np.array([1.0]),
        a_ub=np.array([[1.0]]),
        b_ub=np.array([-1.0]),
        lower=np.zeros(1),
        upper=np.full(1, np.inf),
    )
    assert solve_lp(infeasible).status == "infeasible"
    unbounded = LinearProgram(
        "min",
        np.array([-1.0]),
        lower=np.zeros(1),
        upper=np.full(1, np.inf),
    )
    assert solve_lp(unbounded).status == "unbounded"


def test_linear_program_validation():
    c = np.array([1.0, 2.0])
    with pytest.raises(ValueError):
        LinearProgram("argmin", c)
    with pytest.raises(ValueError):
        LinearProgram("min", c, a_ub=np.array([[1.0]]), b_ub=np.array([1.0]))
    with pytest.raises(ValueError):
        LinearProgram("min", c, a_ub=np.array([[1.0, 1.0]]), b_ub=np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        LinearProgram("min", c, lower=np.zeros(3))
    with pytest.raises(ValueError):
        LinearProgram("min", np.array([np.nan, 1.0]))


def test_lp_text_round_trip():
    rng = np.random.default_rng(88)
    for _ in range(20):
        n, m_ub, m_eq = int(rng.integers(1, 5)), int(rng.integers(0, 3)), int(
            rng.integers(0, 2)
        )
        lp = LinearProgram(
            "min" if rng.random() < 0.5 else "max",
            rng.normal(size=n),
            a_ub=rng.normal(size=(m_ub, n)) if m_ub else None,
            b_ub=rng.normal(size=m_ub) if m_ub else None,
            a_eq=rng.normal(size=(m_eq, n)) if m_eq else None,
            b_eq=rng.normal(size=m_eq) if m_eq else None,
            lower=np.where(rng.random(n) < 0.3, -np.inf, rng.normal(size=n) - 5),
            upper=np.where(rng.random(n) < 0.3, np.inf, rng.normal(size=n) + 5),
        )
        back = lp_from_text(lp_to_text(lp))
        assert back.sense == lp.sense
        assert np.array_equal(back.c, lp.c)
        assert (back.a_ub is None) == (lp.a_ub is None)
        if lp.a_ub is not None:
            assert np.array_equal(back.a_ub, lp.a_ub)
            assert np.array_equal(back.b_ub, lp.b_ub)
        if lp.a_eq is not None:
            assert np.array_equal(back.a_eq, lp.a_eq)
            assert np.array_equal(back.b_eq, lp.b_eq)
        assert np.array_equal(back.lower, lp.lower)
        assert np.array_equal(back.upper, lp.upper)


def test_lp_text_solves_identically():
    spec, loss = canonical_spec()
    # independent cross-check of the serializer: a canonical problem
    # round-tripped through text solves to the same value
    lp = LinearProgram(
        "max",
        loss,
        a_ub=np.vstack([np.eye(2), -np.eye(2)]),
        b_ub=np.array([0.7, 0.7, -0.3, -0.3]),
        a_eq=np.ones((1, 2)),
        b_eq=np.array([1.0]),
        lower=np.zeros(2),
        upper=np.ones(2),
    )
    direct = solve_lp(lp)
    rebuilt = solve_lp(lp_from_text(lp_to_text(lp)))
    assert direct.status == rebuilt.status == "optimal"
    assert rebuilt.value == pytest.approx(direct.value, abs=1e-12)


def test_lp_text_rejects_malformed():
    with pytest.raises(ValueError):
        lp_from_text("")
    with pytest.raises(ValueError):
        lp_from_text("lp2\nsense min\n")
    spec_text = lp_to_text(LinearProgram("min", np.array([1.0])))
    with pytest.raises(ValueError):
        lp_from_text(spec_text + "mystery 1 2 3\n")
    with pytest.raises(ValueError):
        lp_from_text(spec_text.replace("min", "sideways"))
