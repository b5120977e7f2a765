"""Distributions on integer lattices, the TV metric, and noise channels.

Shows the basic objects everything else builds on: finite supports,
distributions with exact mass vectors, the total-variation distance, and
column-stochastic noise channels with their contraction behaviour.
"""

import numpy as np

from tvdro import (
    DiscreteDistribution,
    Support,
    dominance_report,
    grid_support,
    identity_channel,
    ldp_channel,
    push_forward,
    sample,
    transmit,
    tv_distance,
)

sup = Support([0, 1, 2])
p = DiscreteDistribution(sup, np.array([0.5, 0.3, 0.2]))
q = DiscreteDistribution(sup, np.array([0.2, 0.3, 0.5]))
print("support points:", sup.points.ravel().tolist())
print(f"tv(p, q)      = {tv_distance(p, q):.3f}   (half the l1 gap)")
print(f"tv(p, p)      = {tv_distance(p, p):.3f}")

# a randomized-response channel: stronger privacy = smaller epsilon = more noise
for eps in (0.5, 2.0, 8.0):
    ch = ldp_channel(sup, eps)
    print(f"ldp eps={eps:<4} diagonal mass {ch.matrix[0, 0]:.3f}")

ch = ldp_channel(sup, 2.0)
print("channel columns sum to", ch.matrix.sum(axis=0).round(12).tolist())

# pushing two laws through the channel brings them closer in TV
image_gap = tv_distance(push_forward(ch, p), push_forward(ch, q))
print(f"tv before channel {tv_distance(p, q):.4f}, after {image_gap:.4f}")

# whether that squeeze is invertible depends on diagonal dominance: the
# strong-privacy channel loses it, the weak-privacy one keeps it
print(f"eps=2 dominance: {dominance_report(ch).is_udd}")
weak = ldp_channel(sup, 8.0)
rep = dominance_report(weak)
weak_gap = tv_distance(push_forward(weak, p), push_forward(weak, q))
print(f"eps=8 dominance: {rep.is_udd}, contraction constant c0 = {rep.contraction_constant:.4f}")
print(f"c0 * image gap = {rep.contraction_constant * weak_gap:.4f} >= original gap {tv_distance(p, q):.4f}")

# channels also act on raw samples, for simulating a private data release
draws = sample(p, 12, 7)
noisy = transmit(ch, draws, 8)
print("clean draws:", draws.indices.tolist())
print("noisy draws:", noisy.indices.tolist())

# identity channel on a product grid: noiseless observation
grid = grid_support([(1, 2), (1, 3)])
print("2x3 grid points:", [tuple(int(v) for v in pt) for pt in grid.points])
print("identity matrix is exact:", bool(np.all(identity_channel(grid).matrix == np.eye(6))))
