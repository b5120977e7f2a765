"""Distributionally robust optimization over finite supports when the
data arrive through a noise channel.

The pipeline: draws of the quantity of interest are observed only after
passing through a known column-stochastic channel.  The empirical
distribution of the noisy draws anchors a total-variation ball sized by
a concentration bound; pulling that ball back through the channel gives
the set of clean distributions consistent with the data.  Decisions are
then ranked by their worst-case expected loss over that set — computed
exactly by a pair of linear programs that certify each other — so the
reported objective is a high-probability upper bound on true performance
and converges to the true optimum as the sample grows (under a
diagonal-dominance condition on the channel).
"""

from .errors import (
    AssumptionViolationError,
    BracketingError,
    DegenerateSupportError,
    EmptyAmbiguitySetError,
    EmptyDatasetError,
    ResourceLimitError,
    SupportMismatchError,
)
from .distributions import (
    DiscreteDistribution,
    SampleSet,
    Support,
    empirical_distribution,
    expected_value,
    grid_support,
    sample,
    tv_distance,
)
from .channels import (
    DominanceReport,
    LdpReport,
    NoiseChannel,
    dominance_report,
    dump_channel_csv,
    identity_channel,
    ldp_channel,
    load_channel_csv,
    pairwise_distances,
    push_forward,
    transmit,
    udd_threshold,
    verify_ldp,
)
from .ambiguity import (
    AmbiguitySpec,
    RadiusPolicy,
    membership_clean,
    membership_observed,
    min_samples,
    radius_tv,
)
from .lp import (
    DualCertificate,
    LinearProgram,
    LpSolution,
    WorstCaseResult,
    lp_from_text,
    lp_to_text,
    min_observable_distance,
    solve_lp,
    worst_case_dual,
    worst_case_oracle,
    worst_case_primal,
)
from .solver import (
    DroSolution,
    RegressionLoss,
    SolveResult,
    TableLoss,
    out_of_sample,
    solve_dro,
    solve_nsaa,
    solve_true,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolationError",
    "BracketingError",
    "DegenerateSupportError",
    "EmptyAmbiguitySetError",
    "EmptyDatasetError",
    "ResourceLimitError",
    "SupportMismatchError",
    "DiscreteDistribution",
    "SampleSet",
    "Support",
    "empirical_distribution",
    "expected_value",
    "grid_support",
    "sample",
    "tv_distance",
    "DominanceReport",
    "LdpReport",
    "NoiseChannel",
    "dominance_report",
    "dump_channel_csv",
    "identity_channel",
    "ldp_channel",
    "load_channel_csv",
    "pairwise_distances",
    "push_forward",
    "transmit",
    "udd_threshold",
    "verify_ldp",
    "AmbiguitySpec",
    "RadiusPolicy",
    "membership_clean",
    "membership_observed",
    "min_samples",
    "radius_tv",
    "DualCertificate",
    "LinearProgram",
    "LpSolution",
    "WorstCaseResult",
    "lp_from_text",
    "lp_to_text",
    "min_observable_distance",
    "solve_lp",
    "worst_case_dual",
    "worst_case_oracle",
    "worst_case_primal",
    "DroSolution",
    "RegressionLoss",
    "SolveResult",
    "TableLoss",
    "out_of_sample",
    "solve_dro",
    "solve_nsaa",
    "solve_true",
]
