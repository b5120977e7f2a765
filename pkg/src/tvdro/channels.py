"""Column-stochastic noise channels between finite supports.

A channel O sends a clean distribution Q on the input support to the
observed distribution O*Q with (O*Q)(x') = sum_x O(x'|x) Q(x).  The
matrix is stored dense with shape (|output|, |input|), columns indexed
by input points, so the push-forward is a single mat-vec.

Privacy-calibrated channels follow the exponential-decay construction

    O(x'|x) = exp(-eps * d(x, x') / (2 * diam)) / Z_x,

with d a point metric (Euclidean by default) and diam the support
diameter under d.  eps = 0 degenerates to the uniform channel and
eps = inf to the identity; both limits are handled explicitly.

CSV layout used by :func:`dump_channel_csv` / :func:`load_channel_csv`::

    point,1;1;1,1;1;2,...
    1;1;1,0.95,0.02,...
    1;1;2,0.05,0.9,...

The first row lists the input points (coordinates joined by ';'), one
column each; every following row starts with an output point and carries
that row of the matrix.  Probabilities are written in full repr
precision, so a round trip reproduces the matrix to well under 1e-12.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .distributions import DiscreteDistribution, SampleSet, Support
from .errors import BracketingError, DegenerateSupportError, SupportMismatchError

__all__ = [
    "NoiseChannel",
    "LdpReport",
    "DominanceReport",
    "identity_channel",
    "ldp_channel",
    "pairwise_distances",
    "push_forward",
    "transmit",
    "verify_ldp",
    "dominance_report",
    "udd_threshold",
    "dump_channel_csv",
    "load_channel_csv",
]

# Column sums within COLUMN_REJECT_TOL of 1 are renormalized exactly;
# larger deviations are rejected at construction.
COLUMN_REJECT_TOL = 1e-9
ENTRY_CLIP_TOL = 1e-12

NORMS = ("euclidean", "l1", "linf")


@dataclass(frozen=True, eq=False)
class NoiseChannel:
    """Conditional law of the observed point given the clean point."""

    input_support: Support
    output_support: Support
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        expected = (len(self.output_support), len(self.input_support))
        if m.shape != expected:
            raise SupportMismatchError(
                f"channel matrix has shape {m.shape}, supports need {expected}"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("channel entries must be finite")
        if np.any(m < -ENTRY_CLIP_TOL):
            raise ValueError("channel entries must be nonnegative")
        m = np.maximum(m, 0.0)
        sums = m.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > COLUMN_REJECT_TOL):
            raise ValueError("every channel column must sum to 1")
        m = m / sums
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def is_square(self) -> bool:
        return self.matrix.shape[0] == self.matrix.shape[1]

    def __repr__(self) -> str:
        return f"NoiseChannel({len(self.input_support)} -> {len(self.output_support)})"


@dataclass(frozen=True)
class LdpReport:
    """Outcome of a pointwise privacy-ratio check."""

    holds: bool
    worst_ratio: float


@dataclass(frozen=True)
class DominanceReport:
    """Diagonal-dominance diagnostics of a square channel.

    ``is_udd`` records whether the smallest diagonal entry strictly
    exceeds cardinality times the largest off-diagonal entry; when it
    does, ``contraction_constant`` is 1 / (min_diag - k * max_offdiag),
    the factor by which the channel's push-forward can shrink
    total-variation distances at worst.
    """

    cardinality: int
    min_diagonal: float
    max_off_diagonal: float
    is_udd: bool
    contraction_constant: float | None


def push_forward(channel: NoiseChannel, p: DiscreteDistribution) -> DiscreteDistribution:
    """Observed distribution O*p of a clean distribution p."""
    if p.support != channel.input_support:
        raise SupportMismatchError("distribution is not on the channel's input support")
    return DiscreteDistribution(channel.output_support, channel.matrix @ p.mass)


def transmit(channel: NoiseChannel, samples: SampleSet, rng_seed: int) -> SampleSet:
    """Pass clean draws through the channel, one observed draw each.

    Output draw i follows the matrix column of input draw i, using
    inverse-CDF lookup with ``numpy.random.default_rng(rng_seed)``; the
    result is a deterministic function of (channel, samples, rng_seed).
    """
    if samples.support != channel.input_support:
        raise SupportMismatchError("samples are not on the channel's input support")
    rng = np.random.default_rng(rng_seed)
    cdf = np.cumsum(channel.matrix, axis=0)
    cdf[-1, :] = 1.0
    u = rng.random(samples.n)
    out = np.empty(samples.n, dtype=np.int64)
    for k in np.unique(samples.indices):
        mask = samples.indices == k
        out[mask] = np.searchsorted(cdf[:, k], u[mask], side="right")
    out = np.minimum(out, len(channel.output_support) - 1)
    return SampleSet(channel.output_support, out)


def identity_channel(support: Support) -> NoiseChannel:
    """Noiseless channel: observed point equals clean point."""
    return NoiseChannel(support, support, np.eye(len(support)))


def pairwise_distances(support: Support, norm: str = "euclidean") -> np.ndarray:
    """Distance matrix between support points under a named norm."""
    if norm not in NORMS:
        raise ValueError(f"unknown norm {norm!r}, expected one of {NORMS}")
    diff = support.points[:, None, :] - support.points[None, :, :]
    diff = diff.astype(float)
    if norm == "euclidean":
        return np.sqrt((diff * diff).sum(axis=-1))
    if norm == "l1":
        return np.abs(diff).sum(axis=-1)
    return np.abs(diff).max(axis=-1)


def _decay_matrix(dist: np.ndarray, epsilon: float) -> np.ndarray:
    diam = dist.max()
    w = np.exp(-epsilon * dist / (2.0 * diam))
    return w / w.sum(axis=0)


def ldp_channel(support: Support, epsilon: float, norm: str = "euclidean") -> NoiseChannel:
    """Privacy-calibrated channel on a common input/output support.

    Entries decay exponentially in the distance between clean and
    observed points, scaled so the worst-case log ratio between any two
    columns is at most ``epsilon`` (verified by :func:`verify_ldp`).

    ``epsilon = 0`` returns the uniform channel and ``epsilon = inf``
    the identity; both are treated as explicit limits.  A single-point
    support has zero diameter and is rejected.
    """
    epsilon = float(epsilon)
    if math.isnan(epsilon) or epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if len(support) == 1:
        raise DegenerateSupportError("privacy channel needs a support with positive diameter")
    if math.isinf(epsilon):
        return identity_channel(support)
    dist = pairwise_distances(support, norm)
    return NoiseChannel(support, support, _decay_matrix(dist, epsilon))


def verify_ldp(channel: NoiseChannel, epsilon: float) -> LdpReport:
    """Check the pointwise privacy ratios of a channel.

    Computes the worst ratio O(x'|a) / O(x'|b) over all output points x'
    and input pairs (a, b); the report holds when it is at most
    exp(epsilon) * (1 + 1e-9).  A zero entry against a positive entry in
    the same row makes the ratio infinite, reported as non-private for
    any finite epsilon.  Rows that are identically zero constrain
    nothing and are skipped.
    """
    worst = 0.0
    for row in channel.matrix:
        top = float(row.max())
        if top == 0.0:
            continue
        bottom = float(row.min())
        if bottom == 0.0:
            worst = math.inf
            break
        worst = max(worst, top / bottom)
    holds = bool(worst <= math.exp(epsilon) * (1.0 + 1e-9))
    return LdpReport(holds=holds, worst_ratio=worst)


def dominance_report(channel: NoiseChannel) -> DominanceReport:
    """Diagonal-dominance diagnostics; needs matching input/output supports."""
    if channel.input_support != channel.output_support:
        raise SupportMismatchError("dominance needs identical input and output supports")
    m = channel.matrix
    k = m.shape[0]
    min_diag = float(np.diag(m).min())
    off = m[~np.eye(k, dtype=bool)]
    max_off = float(off.max()) if off.size else 0.0
    is_udd = min_diag > k * max_off
    c0 = 1.0 / (min_diag - k * max_off) if is_udd else None
    return DominanceReport(
        cardinality=k,
        min_diagonal=min_diag,
        max_off_diagonal=max_off,
        is_udd=is_udd,
        contraction_constant=c0,
    )


def udd_threshold(
    support: Support,
    lo: float,
    hi: float,
    tol: float = 1e-6,
    norm: str = "euclidean",
) -> float:
    """Smallest privacy level at which the decay channel becomes
    uniformly diagonally dominant, located by bisection.

    Requires dominance to fail at ``lo`` and hold at ``hi`` (checked up
    front; :class:`BracketingError` otherwise) and dominance to be
    monotone in between, which holds for the decay construction because
    larger epsilon concentrates every column on its diagonal.  The
    returned value is within ``tol`` of the true threshold.
    """
    lo, hi, tol = float(lo), float(hi), float(tol)
    if not lo < hi:
        raise ValueError("need lo < hi")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if lo < 0:
        raise ValueError("privacy levels are nonnegative")
    if len(support) == 1:
        raise DegenerateSupportError("threshold needs a support with positive diameter")
    dist = pairwise_distances(support, norm)
    k = len(support)
    eye = np.eye(k, dtype=bool)

    def dominant(eps: float) -> bool:
        m = _decay_matrix(dist, eps)
        return float(np.diag(m).min()) > k * float(m[~eye].max())

    if dominant(lo) or not dominant(hi):
        raise BracketingError(
            f"dominance must fail at lo and hold at hi (lo={lo}: {dominant(lo)}, hi={hi}: {dominant(hi)})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if dominant(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _format_point(point: np.ndarray) -> str:
    return ";".join(str(int(v)) for v in point)


def _parse_point(cell: str) -> tuple[int, ...]:
    parts = cell.strip().split(";")
    if not parts or any(p == "" for p in parts):
        raise ValueError(f"malformed point cell {cell!r}")
    return tuple(int(p) for p in parts)


def dump_channel_csv(channel: NoiseChannel, path) -> None:
    """Write a channel to CSV in the layout documented in the module docstring."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point"] + [_format_point(p) for p in channel.input_support.points])
        for i, q in enumerate(channel.output_support.points):
            writer.writerow([_format_point(q)] + [repr(float(v)) for v in channel.matrix[i]])


def load_channel_csv(path) -> NoiseChannel:
    """Read a channel written by :func:`dump_channel_csv`."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError("channel file is empty")
    header = rows[0]
    if not header or header[0] != "point" or len(header) < 2:
        raise ValueError("channel file must start with a 'point' header row")
    in_pts = [_parse_point(c) for c in header[1:]]
    out_pts = []
    matrix = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"row {lineno} has {len(row)} cells, expected {len(header)}")
        out_pts.append(_parse_point(row[0]))
        matrix.append([float(v) for v in row[1:]])
    if not out_pts:
        raise ValueError("channel file has no matrix rows")
    return NoiseChannel(
        Support(np.array(in_pts, dtype=np.int64)),
        Support(np.array(out_pts, dtype=np.int64)),
        np.array(matrix, dtype=float),
    )
