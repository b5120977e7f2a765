"""Why fitting to noisy data directly goes wrong, and what robustness buys.

A two-outcome decision problem observed through a 20% flip channel: the
naive plug-in fit converges to the wrong value (it optimizes against the
noisy law), while the robust fit pulls the ball back through the channel
and lands near the true optimum.
"""

from tvdro import (
    AmbiguitySpec,
    RadiusPolicy,
    empirical_distribution,
    out_of_sample,
    radius_tv,
    sample,
    solve_dro,
    solve_nsaa,
    solve_true,
    transmit,
)
from tvdro.experiments.synthetic import flip_scenario

sc = flip_scenario()
truth_value = solve_true(sc.truth, sc.loss)
naive_limit = solve_true(sc.observed_truth, sc.loss)
print(f"true optimum J* = {truth_value.value:.4f} (decision {truth_value.decision})")
print(f"naive limit on the noisy law = {naive_limit.value:.4f}")
print(f"asymptotic naive bias = {abs(naive_limit.value - truth_value.value):.4f}")
print()

print(f"{'n':>7} {'naive':>8} {'robust':>8} {'naive oos':>10} {'robust oos':>11}")
for n in (100, 1000, 10000, 100000):
    clean = sample(sc.truth, n, 2 * n)
    noisy = transmit(sc.channel, clean, 2 * n + 1)

    nsaa = solve_nsaa(noisy, sc.loss)
    eps = radius_tv(RadiusPolicy(len(sc.support), n, alpha=0.05))
    spec = AmbiguitySpec(sc.channel, empirical_distribution(noisy), eps)
    robust = solve_dro(spec, sc.loss)

    # out-of-sample cost: what each decision actually costs under the truth
    oos_naive = out_of_sample(sc.truth, sc.loss, nsaa.decision)
    oos_robust = out_of_sample(sc.truth, sc.loss, robust.decision)
    print(f"{n:>7} {nsaa.value:>8.4f} {robust.value:>8.4f} "
          f"{oos_naive:>10.4f} {oos_robust:>11.4f}")

print()
print("the naive value column settles near the biased limit; the robust")
print("value approaches J* from above and certifies the decision it picks")
