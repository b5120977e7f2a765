"""Monte-Carlo experiment harnesses and deterministic CSV emission.

Every run is reproducible from (config, seeds): each grid cell derives its
own generator seed, rows are sorted by a documented key, and numbers are
formatted locale-independently, so rerunning a config yields a byte-identical
CSV body under the timestamp comment line.
"""

from __future__ import annotations

import datetime
import hashlib
from dataclasses import dataclass

import numpy as np

from ..ambiguity import AmbiguitySpec, RadiusPolicy, radius_tv
from ..channels import NoiseChannel, ldp_channel, push_forward, transmit
from ..distributions import (
    DiscreteDistribution,
    SampleSet,
    Support,
    empirical_distribution,
    sample,
    tv_distance,
)
from ..solver import (
    RegressionLoss,
    solve_dro,
    solve_nsaa,
    solve_true,
    out_of_sample,
)
from .config import ExperimentConfig

GUARANTEE_SLACK = 1e-9
SLOPE_GAP_FLOOR = 1e-16


def derive_seed(root: int, *path: int | str) -> int:
    """Stable 64-bit seed for one cell of an experiment grid.

    Streams for distinct (root, path) tuples are independent; strings are
    folded in by a fixed hash so labels like "clean" or "fig1" participate.
    """
    entropy: list[int] = [int(root) & 0xFFFFFFFFFFFFFFFF]
    for part in path:
        if isinstance(part, str):
            digest = hashlib.blake2s(part.encode("utf-8"), digest_size=8).digest()
            entropy.append(int.from_bytes(digest, "big"))
        else:
            entropy.append(int(part) & 0xFFFFFFFFFFFFFFFF)
    seq = np.random.SeedSequence(entropy)
    return int(seq.generate_state(1, np.uint64)[0])


# -- random worst-case instances (shared by tests and the CLI) -------------


@dataclass(frozen=True)
class RandomInstance:
    """One randomly drawn worst-case-expectation problem."""

    spec: AmbiguitySpec
    loss: np.ndarray


def random_instance(
    seed: int,
    *,
    k: int | None = None,
    kp: int | None = None,
    epsilon: float | None = None,
    size_range: tuple[int, int] = (2, 6),
    eps_choices: tuple[float, ...] = (0.0, 0.05, 0.3, 1.5),
    margin: float = 0.5,
) -> RandomInstance:
    """Draw a channel, center, radius, and loss with a non-empty feasible set.

    The center is a convex mix of a pushed-forward clean distribution and a
    random one, with mixing weight at most margin * epsilon, so the clean
    distribution sits inside the ambiguity set with slack.
    """
    rng = np.random.default_rng(seed)
    lo, hi = size_range
    if k is None:
        k = int(rng.integers(lo, hi + 1))
    if kp is None:
        kp = int(rng.integers(lo, hi + 1))
    support_in = Support(np.arange(k, dtype=np.int64).reshape(-1, 1))
    support_out = Support(np.arange(kp, dtype=np.int64).reshape(-1, 1))
    matrix = rng.dirichlet(np.ones(kp), size=k).T
    channel = NoiseChannel(support_in, support_out, matrix)
    q0 = DiscreteDistribution(support_in, rng.dirichlet(np.ones(k)))
    base = push_forward(channel, q0)
    if epsilon is None:
        epsilon = float(rng.choice(np.asarray(eps_choices, dtype=float)))
    delta = margin * min(1.0, epsilon) * float(rng.uniform())
    mix = rng.dirichlet(np.ones(kp))
    center = DiscreteDistribution(
        support_out, (1.0 - delta) * base.mass + delta * mix
    )
    loss = rng.uniform(-1.0, 1.0, size=k)
    return RandomInstance(AmbiguitySpec(channel, center, float(epsilon)), loss)


# -- CSV report tables ------------------------------------------------------


@dataclass(frozen=True)
class ReportTable:
    """Tidy result table: fixed columns, one observation per row."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def body(self) -> str:
        """Deterministic CSV body: header plus formatted rows."""
        lines = [",".join(self.columns)]
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(
                    f"row width {len(row)} does not match {len(self.columns)} columns"
                )
            lines.append(",".join(_format_cell(cell) for cell in row))
        return "\n".join(lines) + "\n"

    def to_csv(self, stamp: bool = True) -> str:
        header = ""
        if stamp:
            now = datetime.datetime.now(datetime.timezone.utc).isoformat()
            header = f"# {self.name} generated {now}\n"
        return header + self.body()


def _format_cell(cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, bool) or isinstance(cell, np.bool_):
        return "true" if cell else "false"
    if isinstance(cell, (int, np.integer)):
        return str(int(cell))
    if isinstance(cell, (float, np.floating)):
        return format(float(cell), ".12g")
    return str(cell)


def write_report(table: ReportTable, path: str | None = None) -> str:
    text = table.to_csv()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    return text


# -- shared scenario assembly ------------------------------------------------


@dataclass(frozen=True)
class _Built:
    support: Support
    truth: DiscreteDistribution
    channel: NoiseChannel
    loss: object
    observed: DiscreteDistribution


def _build(config: ExperimentConfig) -> _Built:
    support = config.build_support()
    truth = config.build_truth(support)
    channel = config.build_channel(support)
    loss = config.build_loss(support)
    observed = push_forward(channel, truth)
    return _Built(support, truth, channel, loss, observed)


def _draw_center(
    truth: DiscreteDistribution,
    channel: NoiseChannel,
    n: int,
    clean_seed: int,
    noise_seed: int,
) -> tuple[SampleSet, SampleSet, DiscreteDistribution]:
    """Clean draw, its corrupted transmission, and the noisy empirical law."""
    clean = sample(truth, n, clean_seed)
    noisy = transmit(channel, clean, noise_seed)
    return clean, noisy, empirical_distribution(noisy)


# -- coverage ---------------------------------------------------------------


def run_coverage(config: ExperimentConfig) -> ReportTable:
    """Empirical coverage of the ambiguity set and of the DRO certificate.

    One row per (n, alpha): frequency over trials of the true distribution
    landing in the set, frequency of the certified value upper-bounding the
    decision's true expected loss, the radius used, and a pass flag
    (coverage >= 1 - alpha).
    """
    built = _build(config)
    root = config.seeds[0]
    cardinality = len(built.channel.output_support)
    solver_kwargs = config.solver_kwargs()
    j_true = solve_true(built.truth, built.loss).value

    rows = []
    for n in config.n_grid:
        for i_alpha, alpha in enumerate(config.alphas):
            epsilon = config.radius_epsilon(n, cardinality, alpha=alpha)
            n_covered = 0
            n_guaranteed = 0
            for trial in range(config.trials):
                _, _, center = _draw_center(
                    built.truth,
                    built.channel,
                    n,
                    derive_seed(root, "coverage", n, i_alpha, trial, "clean"),
                    derive_seed(root, "coverage", n, i_alpha, trial, "noise"),
                )
                spec = AmbiguitySpec(built.channel, center, epsilon)
                if tv_distance(built.observed, center) <= epsilon + 1e-12:
                    n_covered += 1
                solution = solve_dro(spec, built.loss, **solver_kwargs)
                true_cost = out_of_sample(built.truth, built.loss, solution.decision)
                if true_cost <= solution.value + GUARANTEE_SLACK:
                    n_guaranteed += 1
            coverage = n_covered / config.trials
            rows.append(
                (
                    n,
                    float(alpha),
                    config.trials,
                    float(epsilon),
                    coverage,
                    n_guaranteed / config.trials,
                    float(j_true),
                    coverage >= 1.0 - alpha,
                )
            )
    rows.sort(key=lambda r: (r[0], r[1]))
    return ReportTable(
        f"{config.name} coverage",
        (
            "n",
            "alpha",
            "trials",
            "radius",
            "coverage",
            "certificate_rate",
            "j_true",
            "pass",
        ),
        tuple(rows),
    )


# -- consistency --------------------------------------------------------------


def run_consistency(config: ExperimentConfig) -> ReportTable:
    """Gap of the robust value to the true optimum as N grows.

    Trial rows carry the robust and naive values, their gaps, the exact
    out-of-sample cost of both decisions, and whether the coverage event
    held (in which case j_true <= j_dro must hold; violations are flagged).
    Median rows aggregate the gap per n; the slope row reports the fitted
    log-log rate of the median gap.
    """
    built = _build(config)
    root = config.seeds[0]
    cardinality = len(built.channel.output_support)
    solver_kwargs = config.solver_kwargs()
    j_true = solve_true(built.truth, built.loss).value

    trial_rows = []
    gaps_by_n: dict[int, list[float]] = {n: [] for n in config.n_grid}
    for n in config.n_grid:
        for seed in config.seeds:
            _, noisy, center = _draw_center(
                built.truth,
                built.channel,
                n,
                derive_seed(root, "consistency", n, seed, "clean"),
                derive_seed(root, "consistency", n, seed, "noise"),
            )
            epsilon = config.radius_epsilon(n, cardinality)
            spec = AmbiguitySpec(built.channel, center, epsilon)
            robust = solve_dro(spec, built.loss, **solver_kwargs)
            naive = solve_nsaa(noisy, built.loss)
            gap = abs(robust.value - j_true)
            covered = tv_distance(built.observed, center) <= epsilon + 1e-12
            violated = covered and robust.value < j_true - GUARANTEE_SLACK
            trial_rows.append(
                (
                    "trial",
                    n,
                    seed,
                    float(robust.value),
                    float(j_true),
                    float(gap),
                    float(naive.value),
                    out_of_sample(built.truth, built.loss, robust.decision),
                    out_of_sample(built.truth, built.loss, naive.decision),
                    covered,
                    violated,
                )
            )
            gaps_by_n[n].append(gap)

    trial_rows.sort(key=lambda r: (r[1], r[2]))
    summary_rows = []
    medians = []
    for n in config.n_grid:
        median = float(np.median(gaps_by_n[n]))
        medians.append(median)
        summary_rows.append(
            ("median", n, None, None, float(j_true), median, None, None, None, None, None)
        )
    log_n = np.log(np.asarray(config.n_grid, dtype=float))
    log_gap = np.log(np.maximum(np.asarray(medians), SLOPE_GAP_FLOOR))
    slope = float(np.polyfit(log_n, log_gap, 1)[0]) if len(medians) > 1 else 0.0
    summary_rows.append(
        ("slope", None, None, None, None, slope, None, None, None, None, None)
    )

    return ReportTable(
        f"{config.name} consistency",
        (
            "record",
            "n",
            "seed",
            "j_dro",
            "j_true",
            "gap",
            "j_nsaa",
            "oos_dro",
            "oos_nsaa",
            "covered",
            "bound_violated",
        ),
        tuple(trial_rows + summary_rows),
    )


# -- out-of-sample comparison across methods ----------------------------------


def run_fig1_style(config: ExperimentConfig) -> ReportTable:
    """Out-of-sample cost of baseline, naive, and robust fits across N.

    Lanes: "noiseless" is the regression on the exact clean law, the best
    any fit in the box can do, so its out-of-sample value lower-bounds every
    other lane at every (n, seed).  Per channel level, "naive" fits the
    corrupted sample as if it were clean and "dro" solves the robust program
    over the channel-aware ambiguity set.  Both corrupted lanes at one
    (n, seed) share the same clean draw, so differences isolate the
    corruption and the remedy.
    """
    if not config.channel_epsilons:
        raise ValueError("fig1-style comparison needs at least one channel epsilon")
    built = _build(config)
    if not isinstance(built.loss, RegressionLoss):
        raise ValueError("fig1-style comparison requires a regression loss model")
    root = config.seeds[0]
    solver_kwargs = config.solver_kwargs()
    channels = [
        (eps, config.build_channel(built.support, epsilon_override=eps))
        for eps in config.channel_epsilons
    ]
    base = solve_true(built.truth, built.loss)
    base_oos = out_of_sample(built.truth, built.loss, base.decision)

    rows = []
    for n in config.n_grid:
        for seed in config.seeds:
            clean = sample(
                built.truth, n, derive_seed(root, "fig1", n, seed, "clean")
            )
            rows.append(
                (n, seed, "noiseless", None, float(base.value), base_oos)
            )
            for lane, (channel_eps, channel) in enumerate(channels):
                noisy = transmit(
                    channel, clean, derive_seed(root, "fig1", n, seed, "noise", lane)
                )
                center = empirical_distribution(noisy)
                naive = solve_nsaa(noisy, built.loss)
                rows.append(
                    (
                        n,
                        seed,
                        "naive",
                        float(channel_eps),
                        float(naive.value),
                        out_of_sample(built.truth, built.loss, naive.decision),
                    )
                )
                epsilon = config.radius_epsilon(n, len(channel.output_support))
                spec = AmbiguitySpec(channel, center, epsilon)
                robust = solve_dro(spec, built.loss, **solver_kwargs)
                rows.append(
                    (
                        n,
                        seed,
                        "dro",
                        float(channel_eps),
                        float(robust.value),
                        out_of_sample(built.truth, built.loss, robust.decision),
                    )
                )

    method_order = {"noiseless": 0, "naive": 1, "dro": 2}
    rows.sort(
        key=lambda r: (r[0], r[1], method_order[r[2]], r[3] if r[3] is not None else -1.0)
    )
    return ReportTable(
        f"{config.name} fig1",
        ("n", "seed", "method", "channel_epsilon", "value", "out_of_sample"),
        tuple(rows),
    )
