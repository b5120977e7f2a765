"""Choosing the ambiguity radius and testing set membership.

The radius shrinks like 1/sqrt(n) and grows with the support size and
the confidence level; min_samples inverts the formula.  An AmbiguitySpec
pins a channel, an observed center, and a radius, and answers whether a
candidate clean law is inside the pulled-back ball.
"""

import numpy as np

from tvdro import (
    AmbiguitySpec,
    DiscreteDistribution,
    RadiusPolicy,
    Support,
    identity_channel,
    ldp_channel,
    membership_clean,
    min_samples,
    push_forward,
    radius_tv,
)

print("radius for 4 observed outcomes at 95% confidence:")
for n in (50, 100, 400, 1600, 10000):
    eps = radius_tv(RadiusPolicy(4, n, alpha=0.05))
    print(f"  n={n:<6} eps={eps:.4f}")

print("radius at n=400 as confidence tightens:")
for alpha in (0.2, 0.05, 0.01, 1e-4):
    eps = radius_tv(RadiusPolicy(4, 400, alpha=alpha))
    print(f"  alpha={alpha:<8} eps={eps:.4f}")

target = 0.2
n_needed = min_samples(4, 0.05, target)
print(f"samples needed for eps <= {target}: {n_needed}")
print(f"  check: radius({n_needed}) = {radius_tv(RadiusPolicy(4, n_needed, alpha=0.05)):.4f}")

# membership with a noiseless channel is a plain TV ball test
sup = Support([0, 1])
center = DiscreteDistribution(sup, np.array([0.5, 0.5]))
spec = AmbiguitySpec(identity_channel(sup), center, 0.2)
inside = DiscreteDistribution(sup, np.array([0.3, 0.7]))
outside = DiscreteDistribution(sup, np.array([0.29, 0.71]))
print(f"(0.3, 0.7) in ball of radius 0.2: {membership_clean(spec, inside)}")
print(f"(0.29, 0.71) in ball of radius 0.2: {membership_clean(spec, outside)}")

# with a noisy channel the ball lives in observed space, so a clean law
# far from the center can still be a member once pushed through
sup3 = Support([0, 1, 2])
ch = ldp_channel(sup3, 1.0)
truth = DiscreteDistribution(sup3, np.array([0.8, 0.1, 0.1]))
observed_center = push_forward(ch, truth)
noisy_spec = AmbiguitySpec(ch, observed_center, 0.05)
candidate = DiscreteDistribution(sup3, np.array([0.9, 0.05, 0.05]))
clean_gap = float(np.abs(candidate.mass - truth.mass).sum() / 2)
print(f"clean tv(candidate, truth) = {clean_gap:.4f}")
print(f"candidate in the pulled-back ball (radius 0.05): {membership_clean(noisy_spec, candidate)}")
assert clean_gap > 0.05, "the clean gap really is wider than the radius"
