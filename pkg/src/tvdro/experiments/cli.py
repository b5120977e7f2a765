"""Command-line interface.

Output discipline: results go to stdout as "key value" lines or CSV; errors
go to stderr as one machine-readable line "error: <Type>: <message>" with
exit code 1; usage problems exit 2 via argparse.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ..ambiguity import AmbiguitySpec, RadiusPolicy, min_samples, radius_tv
from ..channels import (
    NoiseChannel,
    dominance_report,
    dump_channel_csv,
    identity_channel,
    ldp_channel,
    load_channel_csv,
    transmit,
    udd_threshold,
    verify_ldp,
)
from ..distributions import (
    DiscreteDistribution,
    Support,
    empirical_distribution,
    grid_support,
    sample,
)
from ..lp import worst_case_dual, worst_case_oracle, worst_case_primal
from ..solver import TableLoss, out_of_sample, solve_dro, solve_nsaa
from .config import ExperimentConfig
from .harness import (
    derive_seed,
    random_instance,
    run_consistency,
    run_coverage,
    run_fig1_style,
    write_report,
)

NORMS = ("euclidean", "l1", "linf")


# -- shipped default configurations -----------------------------------------


def coverage_defaults() -> ExperimentConfig:
    return ExperimentConfig(
        name="coverage-default",
        scenario="three_point",
        n_grid=[200],
        alphas=[0.05],
        trials=1000,
        seeds=[0],
    )


def consistency_defaults() -> ExperimentConfig:
    return ExperimentConfig(
        name="consistency-default",
        scenario="three_point",
        radius={"schedule": "one_over_n_squared"},
        n_grid=[100, 1000, 10000, 100000],
        seeds=list(range(20)),
        trials=1,
    )


def fig1_defaults() -> ExperimentConfig:
    # 2000 subgradient iterations per robust solve: at n = 10^4 the radius is
    # tight enough that an under-converged iterate gives away the ordering
    # against the naive fit.  18 robust solves keep the run well under 10 min.
    return ExperimentConfig(
        name="fig1-default",
        scenario="lending_records",
        channel_epsilons=[3.0, 10.0],
        n_grid=[100, 1000, 10000],
        seeds=[0, 1, 2],
        radius={"alpha": 0.05},
        solver={"max_iter": 2000, "window": 250},
    )


def solve_defaults() -> ExperimentConfig:
    return ExperimentConfig(name="solve-default", scenario="three_point")


# -- small parsers ------------------------------------------------------------


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",") if tok.strip() != ""])
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_grid(text: str) -> list[tuple[int, int]]:
    """Grid shape like '5x5x7': axis i gets codes 1..n_i."""
    try:
        sizes = [int(tok) for tok in text.lower().split("x")]
    except ValueError:
        raise ValueError(f"expected a grid shape like 5x5x7, got {text!r}") from None
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError(f"grid axes must be positive, got {text!r}")
    return [(1, s) for s in sizes]


def _parse_points(text: str) -> np.ndarray:
    """Support points like '0;1;2' (1-D) or '0,0;0,1;1,0' (rows)."""
    rows = [row for row in text.split(";") if row.strip() != ""]
    parsed = [[int(tok) for tok in row.split(",")] for row in rows]
    return np.array(parsed, dtype=np.int64)


def _support_from_args(args) -> Support:
    if getattr(args, "grid", None):
        return grid_support(_parse_grid(args.grid))
    if getattr(args, "points", None):
        return Support(_parse_points(args.points))
    raise ValueError("provide a support via --grid or --points")


def _channel_from_args(args, size_hint: int | None = None) -> NoiseChannel:
    """Channel from --matrix, or --ldp-epsilon on the given support, or identity."""
    if getattr(args, "matrix", None):
        return load_channel_csv(args.matrix)
    if getattr(args, "ldp_epsilon", None) is not None:
        support = (
            _support_from_args(args)
            if (getattr(args, "grid", None) or getattr(args, "points", None))
            else _default_support(size_hint)
        )
        return ldp_channel(support, args.ldp_epsilon, norm=getattr(args, "norm", "euclidean"))
    if size_hint is None:
        raise ValueError("provide a channel via --matrix or --ldp-epsilon")
    return identity_channel(_default_support(size_hint))


def _default_support(size_hint: int | None) -> Support:
    if size_hint is None:
        raise ValueError("support size cannot be inferred; pass --grid or --points")
    return Support(np.arange(size_hint, dtype=np.int64).reshape(-1, 1))


def _load_config(args, fallback: ExperimentConfig) -> ExperimentConfig:
    if getattr(args, "config", None):
        return ExperimentConfig.load(args.config)
    return fallback


def _print_kv(key: str, value) -> None:
    if isinstance(value, float):
        print(f"{key} {value:.12g}")
    elif isinstance(value, bool):
        print(f"{key} {'true' if value else 'false'}")
    else:
        print(f"{key} {value}")


def _emit_report(table, args) -> None:
    out = getattr(args, "out", None)
    text = write_report(table, out)
    if out:
        print(f"wrote {out} ({len(table.rows)} rows)")
    else:
        sys.stdout.write(text)


# -- subcommand handlers -------------------------------------------------------


def _cmd_radius(args) -> int:
    printed = False
    if args.n is not None:
        if args.schedule:
            policy = RadiusPolicy(args.card, args.n, schedule=args.schedule)
        else:
            policy = RadiusPolicy(args.card, args.n, alpha=args.alpha)
        print(f"radius {radius_tv(policy):.6g}")
        printed = True
    if args.target_eps is not None:
        if args.alpha is None:
            raise ValueError("min_samples needs --alpha")
        _print_kv("min_samples", min_samples(args.card, args.alpha, args.target_eps))
        printed = True
    if not printed:
        raise ValueError("provide --n for a radius, --target-eps for a sample bound")
    return 0


def _cmd_channel(args) -> int:
    action = args.action
    if action == "build":
        support = _support_from_args(args)
        if args.epsilon is None:
            raise ValueError("channel build needs --epsilon")
        channel = ldp_channel(support, args.epsilon, norm=args.norm)
        if args.out:
            dump_channel_csv(channel, args.out)
            print(f"wrote {args.out}")
        _describe_channel(channel)
        return 0

    if action == "udd-threshold":
        support = _support_from_args(args)
        norms = NORMS if args.norm == "all" else (args.norm,)
        for norm in norms:
            hi = args.hi if args.hi is not None else _bracket_hi(support, norm)
            threshold = udd_threshold(support, args.lo, hi, tol=args.tol, norm=norm)
            print(f"udd_threshold_{norm} {threshold:.6g}")
        return 0

    if args.matrix:
        channel = load_channel_csv(args.matrix)
    else:
        support = _support_from_args(args)
        if args.epsilon is None:
            raise ValueError(f"channel {action} needs --matrix, or --grid/--points with --epsilon")
        channel = ldp_channel(support, args.epsilon, norm=args.norm)

    if action == "inspect":
        _describe_channel(channel)
        return 0
    if action == "verify-ldp":
        claim = args.claim if args.claim is not None else args.epsilon
        if claim is None:
            raise ValueError("verify-ldp needs --claim (or --epsilon) to check against")
        report = verify_ldp(channel, claim)
        _print_kv("holds", report.holds)
        _print_kv("worst_ratio", report.worst_ratio)
        _print_kv("bound", float(np.exp(claim)))
        return 0 if report.holds else 1
    if action == "dominance":
        report = dominance_report(channel)
        _print_kv("cardinality", report.cardinality)
        _print_kv("min_diagonal", report.min_diagonal)
        _print_kv("max_off_diagonal", report.max_off_diagonal)
        _print_kv("is_udd", report.is_udd)
        if report.contraction_constant is not None:
            _print_kv("contraction_constant", report.contraction_constant)
        return 0
    raise ValueError(f"unknown channel action {action!r}")


def _bracket_hi(support: Support, norm: str) -> float:
    """Smallest power of two at which the decay channel is dominant."""
    hi = 1.0
    while hi <= 2.0**20:
        if dominance_report(ldp_channel(support, hi, norm=norm)).is_udd:
            return hi
        hi *= 2.0
    raise ValueError(f"no dominant channel found below epsilon = 2^20 ({norm} norm)")


def _describe_channel(channel: NoiseChannel) -> None:
    _print_kv("inputs", len(channel.input_support))
    _print_kv("outputs", len(channel.output_support))
    _print_kv("min_entry", float(channel.matrix.min()))
    if len(channel.input_support) == len(channel.output_support):
        report = dominance_report(channel)
        _print_kv("min_diagonal", report.min_diagonal)
        _print_kv("max_off_diagonal", report.max_off_diagonal)
        _print_kv("is_udd", report.is_udd)


def _cmd_worst_case(args) -> int:
    center_mass = _parse_vector(args.center)
    loss = _parse_vector(args.loss)
    channel = _channel_from_args(args, size_hint=center_mass.size)
    if len(channel.output_support) != center_mass.size:
        raise ValueError(
            f"center has {center_mass.size} entries but channel outputs {len(channel.output_support)}"
        )
    if len(channel.input_support) != loss.size:
        raise ValueError(
            f"loss has {loss.size} entries but channel inputs {len(channel.input_support)}"
        )
    center = DiscreteDistribution(channel.output_support, center_mass)
    spec = AmbiguitySpec(channel, center, args.epsilon)
    if args.route == "oracle":
        _print_kv("value", worst_case_oracle(spec, loss, args.step))
        return 0
    solver = {"primal": worst_case_primal, "dual": worst_case_dual}[args.route]
    result = solver(spec, loss)
    _print_kv("value", result.value)
    print("q_star " + ",".join(f"{q:.12g}" for q in result.q_star.mass))
    cert = result.dual_cert
    if cert is not None:
        print("lambda " + ",".join(f"{v:.12g}" for v in cert.lam))
        print("mu " + ",".join(f"{v:.12g}" for v in cert.mu))
        _print_kv("r", cert.r)
        _print_kv("t", cert.t)
        _print_kv("dual_objective", cert.objective(spec))
    return 0


def _scenario_sample(config: ExperimentConfig, n: int, seed: int, lane: str):
    support = config.build_support()
    truth = config.build_truth(support)
    channel = config.build_channel(support)
    loss = config.build_loss(support)
    clean = sample(truth, n, derive_seed(seed, lane, n, "clean"))
    noisy = transmit(channel, clean, derive_seed(seed, lane, n, "noise"))
    return support, truth, channel, loss, clean, noisy


def _print_decision(model, decision) -> None:
    if isinstance(model, TableLoss):
        _print_kv("decision", int(decision))
        label = model.decision_labels[int(decision)] if model.decision_labels else None
        if label is not None:
            _print_kv("decision_label", label)
    else:
        print("decision " + ",".join(f"{v:.12g}" for v in np.asarray(decision)))


def _cmd_solve(args) -> int:
    config = _load_config(args, solve_defaults())
    n = args.n if args.n is not None else config.n_grid[-1]
    seed = args.seed if args.seed is not None else config.seeds[0]
    support, truth, channel, loss, _, noisy = _scenario_sample(config, n, seed, "solve")
    center = empirical_distribution(noisy)
    epsilon = config.radius_epsilon(n, len(channel.output_support))
    spec = AmbiguitySpec(channel, center, epsilon)
    solution = solve_dro(spec, loss, **config.solver_kwargs())
    _print_kv("n", n)
    _print_kv("radius", float(epsilon))
    _print_kv("value", solution.value)
    _print_decision(loss, solution.decision)
    _print_kv("out_of_sample", out_of_sample(truth, loss, solution.decision))
    if solution.iterations is not None:
        _print_kv("iterations", solution.iterations)
    return 0


def _cmd_nsaa(args) -> int:
    config = _load_config(args, solve_defaults())
    n = args.n if args.n is not None else config.n_grid[-1]
    seed = args.seed if args.seed is not None else config.seeds[0]
    support, truth, channel, loss, clean, noisy = _scenario_sample(config, n, seed, "nsaa")
    samples = clean if args.clean else noisy
    solution = solve_nsaa(samples, loss)
    _print_kv("n", n)
    _print_kv("lane", "clean" if args.clean else "noisy")
    _print_kv("value", solution.value)
    _print_decision(loss, solution.decision)
    _print_kv("out_of_sample", out_of_sample(truth, loss, solution.decision))
    return 0


def _cmd_coverage(args) -> int:
    config = _load_config(args, coverage_defaults())
    _emit_report(run_coverage(config), args)
    return 0


def _cmd_consistency(args) -> int:
    config = _load_config(args, consistency_defaults())
    _emit_report(run_consistency(config), args)
    return 0


def _cmd_fig1(args) -> int:
    config = _load_config(args, fig1_defaults())
    _emit_report(run_fig1_style(config), args)
    return 0


def _cmd_oracle_check(args) -> int:
    if args.center is not None or args.loss is not None:
        if args.center is None or args.loss is None:
            raise ValueError("--center and --loss must be given together")
        center_mass = _parse_vector(args.center)
        loss = _parse_vector(args.loss)
        channel = _channel_from_args(args, size_hint=center_mass.size)
        center = DiscreteDistribution(channel.output_support, center_mass)
        instances = [(AmbiguitySpec(channel, center, args.eps), loss)]
    else:
        instances = []
        for i in range(args.instances):
            inst = random_instance(
                derive_seed(args.seed, "oracle-check", i),
                k=args.size,
                kp=args.size,
                epsilon=args.eps,
            )
            instances.append((inst.spec, inst.loss))

    worst_primal_gap = 0.0
    worst_oracle_gap = 0.0
    ok = True
    for i, (spec, loss) in enumerate(instances):
        primal = worst_case_primal(spec, loss)
        dual = worst_case_dual(spec, loss)
        oracle_value = worst_case_oracle(spec, loss, args.step)
        scale = 1.0 + abs(dual.value)
        pd_gap = abs(primal.value - dual.value)
        do_gap = dual.value - oracle_value
        bound = float(np.abs(loss).max()) * loss.size * args.step
        print(
            f"instance {i} primal {primal.value:.12g} dual {dual.value:.12g} "
            f"oracle {oracle_value:.12g}"
        )
        worst_primal_gap = max(worst_primal_gap, pd_gap / scale)
        worst_oracle_gap = max(worst_oracle_gap, do_gap)
        if pd_gap > 1e-8 * scale or do_gap < -1e-9 or do_gap > bound:
            ok = False
    _print_kv("worst_primal_dual_gap", worst_primal_gap)
    _print_kv("worst_dual_oracle_gap", worst_oracle_gap)
    _print_kv("ok", ok)
    return 0 if ok else 1


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvdro",
        description="Distributionally robust decisions from noise-corrupted samples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("radius", help="concentration radius and sample bounds")
    p.add_argument("--card", type=int, required=True, help="support cardinality")
    p.add_argument("--alpha", type=float, help="significance level in (0,1)")
    p.add_argument("--schedule", choices=["one_over_n_squared"], help="alpha schedule")
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--target-eps", type=float, help="print samples needed for this radius")
    p.set_defaults(handler=_cmd_radius)

    p = sub.add_parser("channel", help="build and analyze noise channels")
    p.add_argument(
        "action",
        choices=["build", "inspect", "verify-ldp", "dominance", "udd-threshold"],
    )
    p.add_argument("--grid", help="grid shape like 5x5x7 (codes start at 1)")
    p.add_argument("--points", help="explicit points like '0;1;2' or '0,0;0,1'")
    p.add_argument("--matrix", help="channel CSV produced by 'channel build'")
    p.add_argument("--epsilon", type=float, help="privacy level for ldp construction")
    p.add_argument("--claim", type=float, help="privacy level to verify against")
    p.add_argument(
        "--norm", default="euclidean", choices=list(NORMS) + ["all"],
        help="distance norm on the support",
    )
    p.add_argument("--out", help="write the channel matrix CSV here")
    p.add_argument("--lo", type=float, default=0.0, help="threshold bracket lower end")
    p.add_argument("--hi", type=float, help="threshold bracket upper end (default: auto)")
    p.add_argument("--tol", type=float, default=1e-6, help="threshold bisection tolerance")
    p.set_defaults(handler=_cmd_channel)

    p = sub.add_parser("worst-case", help="solve one worst-case expectation instance")
    p.add_argument("--center", required=True, help="observed distribution, e.g. 0.5,0.5")
    p.add_argument("--loss", required=True, help="loss per clean outcome, e.g. 0,1")
    p.add_argument("--epsilon", type=float, required=True, help="ambiguity radius")
    p.add_argument("--matrix", help="channel CSV (default: identity channel)")
    p.add_argument("--ldp-epsilon", type=float, help="build an ldp channel instead")
    p.add_argument("--grid", help="support for --ldp-epsilon")
    p.add_argument("--points", help="support for --ldp-epsilon")
    p.add_argument("--norm", default="euclidean", choices=list(NORMS))
    p.add_argument("--route", default="dual", choices=["dual", "primal", "oracle"])
    p.add_argument("--step", type=float, default=1e-3, help="oracle grid step")
    p.set_defaults(handler=_cmd_worst_case)

    for name, handler, extra in (
        ("solve", _cmd_solve, True),
        ("nsaa", _cmd_nsaa, True),
    ):
        p = sub.add_parser(name, help=f"{name} on samples drawn from a config scenario")
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--n", type=int, help="sample size (default: last n_grid entry)")
        p.add_argument("--seed", type=int, help="trial seed (default: first config seed)")
        if name == "nsaa":
            p.add_argument("--clean", action="store_true", help="fit the clean samples")
        p.set_defaults(handler=handler)

    for name, handler in (
        ("coverage", _cmd_coverage),
        ("consistency", _cmd_consistency),
        ("fig1", _cmd_fig1),
    ):
        p = sub.add_parser(name, help=f"run the {name} experiment, emit tidy CSV")
        p.add_argument("--config", help="experiment config JSON (default: shipped)")
        p.add_argument("--out", help="write CSV here instead of stdout")
        p.set_defaults(handler=handler)

    p = sub.add_parser("oracle-check", help="cross-check primal, dual, and grid oracle")
    p.add_argument("--size", type=int, default=2, help="clean and observed cardinality")
    p.add_argument("--eps", type=float, default=0.2, help="ambiguity radius")
    p.add_argument("--instances", type=int, default=5, help="random instances to check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=1e-3, help="oracle grid step")
    p.add_argument("--center", help="fixed center instead of random instances")
    p.add_argument("--loss", help="fixed loss instead of random instances")
    p.add_argument("--matrix", help="channel CSV for the fixed instance")
    p.add_argument("--ldp-epsilon", type=float, help="ldp channel for the fixed instance")
    p.add_argument("--grid", help="support for --ldp-epsilon")
    p.add_argument("--points", help="support for --ldp-epsilon")
    p.add_argument("--norm", default="euclidean", choices=list(NORMS))
    p.set_defaults(handler=_cmd_oracle_check)

    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        message = str(exc).replace("\n", " | ")
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
