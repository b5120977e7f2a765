"""Built-in synthetic scenarios.

Each scenario bundles a finite support, a ground-truth distribution, a noise
channel, and a loss, so harness runs and tests can share one definition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ambiguity import AmbiguitySpec
from ..channels import NoiseChannel, ldp_channel, push_forward
from ..distributions import DiscreteDistribution, Support, grid_support
from ..solver import RegressionLoss, TableLoss


@dataclass(frozen=True)
class Scenario:
    """A complete synthetic problem: truth, corruption, and loss."""

    name: str
    support: Support
    truth: DiscreteDistribution
    channel: NoiseChannel
    loss: TableLoss | RegressionLoss

    @property
    def observed_truth(self) -> DiscreteDistribution:
        """Distribution the sampler actually draws from after corruption."""
        return push_forward(self.channel, self.truth)


def three_point_scenario() -> Scenario:
    """Three outcomes, mild symmetric noise, a 3x3 decision table.

    The channel keeps 0.9 of the mass in place and leaks 0.05 to each other
    outcome, which satisfies uniform diagonal dominance (0.9 > 3 * 0.05).
    Decision 0 is optimal under the truth with expected loss 0.7.
    """
    support = Support(np.array([[0], [1], [2]]))
    truth = DiscreteDistribution(support, np.array([0.5, 0.3, 0.2]))
    matrix = np.full((3, 3), 0.05)
    np.fill_diagonal(matrix, 0.9)
    channel = NoiseChannel(support, support, matrix)
    table = np.array(
        [
            [0.0, 1.0, 2.0],
            [2.0, 0.0, 1.0],
            [1.0, 2.0, 0.0],
        ]
    )
    loss = TableLoss(support, table)
    return Scenario("three_point", support, truth, channel, loss)


def flip_scenario(flip: float = 0.2) -> Scenario:
    """Binary outcome with a symmetric flip channel.

    With truth (0.9, 0.1) and flip probability 0.2 the observed law is
    (0.74, 0.26).  Guessing the outcome costs 0 when right and 1 when wrong,
    so the true optimum is 0.1 (always predict outcome 0) while estimators
    that trust the corrupted samples converge to 0.26.
    """
    if not 0.0 <= flip < 0.5:
        raise ValueError(f"flip probability must be in [0, 0.5), got {flip}")
    support = Support(np.array([[0], [1]]))
    truth = DiscreteDistribution(support, np.array([0.9, 0.1]))
    matrix = np.array([[1.0 - flip, flip], [flip, 1.0 - flip]])
    channel = NoiseChannel(support, support, matrix)
    table = np.array([[0.0, 1.0], [1.0, 0.0]])
    loss = TableLoss(support, table)
    return Scenario("flip", support, truth, channel, loss)


def lending_grid() -> Support:
    """Bracketed lending records: credit code 1..5, loan code 1..5, rate 1..7."""
    return grid_support([(1, 5), (1, 5), (1, 7)])


def lending_truth(support: Support | None = None) -> DiscreteDistribution:
    """Ground truth over the lending grid.

    Credit and loan codes are independent with unimodal marginals peaked at
    the middle brackets.  Given (credit c, loan l), the rate code is a
    triangular bump of half-width 2 centred on

        m(c, l) = clip(8 - 1.4 c + 0.3 (l - 3), 1, 7)

    so cheap credit maps to low rates and large loans push rates up slightly.
    """
    if support is None:
        support = lending_grid()
    credit = np.array([0.10, 0.20, 0.35, 0.25, 0.10])
    loan = np.array([0.15, 0.25, 0.30, 0.20, 0.10])
    mass = np.zeros(len(support))
    points = support.points
    for i in range(len(support)):
        c, l, r = (int(v) for v in points[i])
        centre = min(7.0, max(1.0, 8.0 - 1.4 * c + 0.3 * (l - 3)))
        weight = max(0.0, 1.0 - abs(r - centre) / 2.0)
        mass[i] = credit[c - 1] * loan[l - 1] * weight
    total = mass.sum()
    if total <= 0.0:
        raise ValueError("lending truth degenerated to zero mass")
    return DiscreteDistribution(support, mass / total)


def lending_regression() -> RegressionLoss:
    """Least-squares rate prediction from (credit, loan) codes.

    The coefficient box encodes the direction of the generator: rates fall
    as credit improves and rise with loan size, with an intercept near the
    upper rate codes.  It contains the population optimum for lending_truth
    (about (-1.30, 0.27, 6.90)) with room on every side, and it is kept
    deliberately snug: projected subgradient steps are sized from the box
    diameter, so a sprawling box slows every downstream solve.
    """
    return RegressionLoss(
        lower=np.array([-2.0, 0.0, 4.0]),
        upper=np.array([0.0, 1.0, 9.0]),
    )


def lending_scenario(channel_epsilon: float = 3.0) -> Scenario:
    """Lending grid corrupted by a privacy channel at the given level."""
    support = lending_grid()
    truth = lending_truth(support)
    channel = ldp_channel(support, channel_epsilon)
    return Scenario(
        f"lending_eps{channel_epsilon:g}",
        support,
        truth,
        channel,
        lending_regression(),
    )


_RECORDS_CREDIT = np.array([0.15, 0.35, 0.30, 0.20])
_RECORDS_LOAN = np.array([0.20, 0.30, 0.30, 0.20])
_RECORDS_HALF_WIDTH = 1.5


def _records_centre(c: int, l: int) -> float:
    # rate surface of the record generator, clipped to the rate codes 1..5
    return min(5.0, max(1.0, 6.0 - 1.3 * c + 0.3 * (l - 2.5)))


def lending_records_support() -> Support:
    """Lending codes restricted to triples the record generator can produce.

    Of the 4 x 4 x 5 code grid (credit, loan, rate) this keeps the 41
    triples whose rate lies within the triangular bump around the rate
    surface.  Observed lending data behaves the same way: top credit never
    pairs with the highest rates.  Dropping the unattainable corners keeps
    worst-case mass on plausible records and shrinks the support, which
    tightens the concentration radius at any sample size.
    """
    points = []
    for c in range(1, 5):
        for l in range(1, 5):
            centre = _records_centre(c, l)
            for r in range(1, 6):
                if abs(r - centre) < _RECORDS_HALF_WIDTH:
                    points.append((c, l, r))
    return Support(np.array(points, dtype=np.int64))


def lending_records_truth(support: Support | None = None) -> DiscreteDistribution:
    """Ground truth over the attainable lending records.

    Same shape as lending_truth on its smaller grid: independent unimodal
    credit and loan marginals, rate a triangular bump of half-width 1.5
    centred on m(c, l) = clip(6 - 1.3 c + 0.3 (l - 2.5), 1, 5).
    """
    if support is None:
        support = lending_records_support()
    mass = np.zeros(len(support))
    for i, point in enumerate(support.points):
        c, l, r = (int(v) for v in point)
        weight = max(0.0, 1.0 - abs(r - _records_centre(c, l)) / _RECORDS_HALF_WIDTH)
        mass[i] = _RECORDS_CREDIT[c - 1] * _RECORDS_LOAN[l - 1] * weight
    total = mass.sum()
    if total <= 0.0:
        raise ValueError("lending records truth degenerated to zero mass")
    return DiscreteDistribution(support, mass / total)


def lending_records_regression() -> RegressionLoss:
    """Rate prediction box for the records support.

    Wide enough that naive fits on corrupted draws land strictly inside
    (no attenuated slope gets rescued by clipping), and it contains the
    population optimum, roughly (-1.12, 0.23, 5.03).
    """
    return RegressionLoss(
        lower=np.array([-2.5, -0.5, 2.0]),
        upper=np.array([0.0, 1.0, 8.0]),
    )


def lending_records_scenario(channel_epsilon: float = 3.0) -> Scenario:
    """Attainable lending records corrupted by a privacy channel.

    The shipped cross-method comparison runs this scenario at privacy
    levels 3 and 10.  Confining the support to attainable records is what
    lets the robust fit pull ahead of the naive one at large sample sizes:
    the adversary cannot park mass on absurd code combinations, so hedging
    stops penalizing the steep (correct) rate surface.
    """
    support = lending_records_support()
    truth = lending_records_truth(support)
    channel = ldp_channel(support, channel_epsilon)
    return Scenario(
        f"lending_records_eps{channel_epsilon:g}",
        support,
        truth,
        channel,
        lending_records_regression(),
    )


def scenario_spec(
    scenario: Scenario,
    center: DiscreteDistribution,
    epsilon: float,
) -> AmbiguitySpec:
    """Ambiguity spec pairing a scenario's channel with an observed center."""
    return AmbiguitySpec(scenario.channel, center, epsilon)
