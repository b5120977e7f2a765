"""Ambiguity sets: concentration radii and ball membership.

The observed-space ball is the set of distributions within total
variation ``epsilon`` of a center (normally the empirical distribution
of noisy draws).  The clean-space set pulls that ball back through a
noise channel: a clean distribution belongs when its push-forward lands
inside the observed ball.

The radius comes from a dimension-aware concentration bound: with n iid
draws from a distribution on k atoms, the empirical distribution is
within

    radius = sqrt(max(k, 2 ln(2 / alpha)) / n)

of the truth in total variation, except with probability at most alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channels import NoiseChannel, push_forward
from .distributions import DiscreteDistribution, tv_distance
from .errors import SupportMismatchError

__all__ = [
    "RadiusPolicy",
    "AmbiguitySpec",
    "radius_tv",
    "min_samples",
    "membership_observed",
    "membership_clean",
    "MEMBERSHIP_SLACK",
]

# Ball membership allows this much slack toward inclusion, so a point
# sitting numerically on the boundary counts as inside.
MEMBERSHIP_SLACK = 1e-12

ALPHA_SCHEDULE = "one_over_n_squared"


@dataclass(frozen=True)
class RadiusPolicy:
    """How to pick the concentration radius for a sample of size n.

    Exactly one of ``alpha`` (a fixed significance in (0, 1)) or
    ``schedule`` (the string ``"one_over_n_squared"``, meaning
    alpha = 1/n^2, whose failure probabilities are summable over n)
    must be given.  ``cardinality`` is the number of atoms of the
    support the empirical distribution lives on.
    """

    cardinality: int
    n: int
    alpha: float | None = None
    schedule: str | None = None

    def __post_init__(self):
        if int(self.cardinality) < 1 or int(self.n) < 1:
            raise ValueError("cardinality and n must be positive integers")
        object.__setattr__(self, "cardinality", int(self.cardinality))
        object.__setattr__(self, "n", int(self.n))
        if (self.alpha is None) == (self.schedule is None):
            raise ValueError("give exactly one of alpha or schedule")
        if self.alpha is not None and not 0.0 < float(self.alpha) < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.schedule is not None:
            if self.schedule != ALPHA_SCHEDULE:
                raise ValueError(f"unknown schedule {self.schedule!r}")
            if self.n < 2:
                raise ValueError("the 1/n^2 schedule needs n >= 2 to keep alpha below 1")

    @property
    def effective_alpha(self) -> float:
        if self.alpha is not None:
            return float(self.alpha)
        return 1.0 / (self.n * self.n)


def radius_tv(policy: RadiusPolicy) -> float:
    """Concentration radius sqrt(max(cardinality, 2 ln(2/alpha)) / n)."""
    alpha = policy.effective_alpha
    return math.sqrt(max(policy.cardinality, 2.0 * math.log(2.0 / alpha)) / policy.n)


def min_samples(cardinality: int, alpha: float, epsilon: float) -> int:
    """Smallest sample size whose radius at (cardinality, alpha) is <= epsilon.

    Inverts the radius formula: n = ceil(max(cardinality, 2 ln(2/alpha)) / epsilon^2),
    with a 1e-9 guard so a bound that is an integer up to roundoff is not
    bumped to the next integer.
    """
    cardinality = int(cardinality)
    if cardinality < 1:
        raise ValueError("cardinality must be a positive integer")
    if not 0.0 < float(alpha) < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    epsilon = float(epsilon)
    if not epsilon > 0 or math.isinf(epsilon):
        raise ValueError("epsilon must be positive and finite")
    bound = max(cardinality, 2.0 * math.log(2.0 / alpha)) / (epsilon * epsilon)
    return max(1, math.ceil(bound - 1e-9))


@dataclass(frozen=True, eq=False)
class AmbiguitySpec:
    """A channel, an observed-space center, and a TV radius.

    ``center`` must live on the channel's output support; ``epsilon``
    is a nonnegative total-variation radius (values above 1 are legal
    and make the observed ball the whole simplex).
    """

    channel: NoiseChannel
    center: DiscreteDistribution
    epsilon: float

    def __post_init__(self):
        if self.center.support != self.channel.output_support:
            raise SupportMismatchError("center must live on the channel's output support")
        eps = float(self.epsilon)
        if math.isnan(eps) or math.isinf(eps) or eps < 0:
            raise ValueError("epsilon must be finite and nonnegative")
        object.__setattr__(self, "epsilon", eps)


def membership_observed(spec: AmbiguitySpec, q: DiscreteDistribution) -> bool:
    """Is q (on the observed support) inside the observed ball?

    Boundary points count as inside, with 1e-12 slack.
    """
    if q.support != spec.channel.output_support:
        raise SupportMismatchError("membership_observed needs a distribution on the observed support")
    return tv_distance(q, spec.center) <= spec.epsilon + MEMBERSHIP_SLACK


def membership_clean(spec: AmbiguitySpec, q: DiscreteDistribution) -> bool:
    """Is q (on the clean support) inside the pulled-back set?

    Equivalent by definition to membership_observed of the push-forward.
    """
    if q.support != spec.channel.input_support:
        raise SupportMismatchError("membership_clean needs a distribution on the clean support")
    return tv_distance(push_forward(spec.channel, q), spec.center) <= spec.epsilon + MEMBERSHIP_SLACK
