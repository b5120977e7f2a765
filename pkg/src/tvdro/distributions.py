"""Finite integer supports, probability vectors on them, and the
total-variation metric.

Everything downstream manipulates distributions over a fixed, ordered
list of integer-valued points.  A distribution is stored as a dense
probability vector aligned to its support, and total variation

    d_TV(p, q) = 0.5 * sum_k |p_k - q_k|

is the metric used throughout; it lives in [0, 1] and equals the largest
discrepancy the two distributions assign to any event.

Sampling is reproducible: draws use numpy's default PCG64 bit generator
through ``numpy.random.default_rng(seed)`` and an inverse-CDF lookup, so
a fixed seed yields the same sample set on every run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSupportError, SupportMismatchError

__all__ = [
    "Support",
    "DiscreteDistribution",
    "SampleSet",
    "grid_support",
    "tv_distance",
    "expected_value",
    "empirical_distribution",
    "sample",
]

# Construction tolerances for probability vectors: a total mass within
# MASS_REJECT_TOL of 1 is silently renormalized, anything worse is
# rejected.  Entries may undershoot zero by at most ENTRY_CLIP_TOL
# (solver roundoff) and are clipped back to 0.
MASS_REJECT_TOL = 1e-9
ENTRY_CLIP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Support:
    """Ordered list of pairwise-distinct integer points in Z^m.

    Parameters
    ----------
    points : array-like, shape (k, m) or (k,)
        Integer coordinates, one row per point.  A 1-d array is read as
        k scalar points.
    labels : sequence of str, optional
        Display names, one per point.
    """

    points: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        pts = np.asarray(self.points)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise DegenerateSupportError("support must be a nonempty (points, dim) array")
        if not np.issubdtype(pts.dtype, np.integer):
            if not np.all(np.isfinite(pts.astype(float))):
                raise DegenerateSupportError("support points must be finite integers")
            rounded = np.round(pts)
            if np.any(pts != rounded):
                raise DegenerateSupportError("support points must be integer-valued")
            pts = rounded
        pts = pts.astype(np.int64)
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise DegenerateSupportError("support points must be pairwise distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = tuple(str(t) for t in self.labels)
            if len(labels) != pts.shape[0]:
                raise DegenerateSupportError("expected one label per support point")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def __eq__(self, other):
        if not isinstance(other, Support):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(
            np.array_equal(self.points, other.points)
        )

    def __hash__(self) -> int:
        return hash((self.points.shape, self.points.tobytes()))

    def index_of(self, point) -> int:
        """Index of an exact coordinate match; raises KeyError if absent."""
        pt = np.asarray(point).reshape(-1)
        if pt.shape[0] != self.dim:
            raise KeyError(f"point {pt.tolist()} has wrong dimension for this support")
        hits = np.flatnonzero(np.all(self.points == pt, axis=1))
        if hits.size == 0:
            raise KeyError(f"point {pt.tolist()} not in support")
        return int(hits[0])

    def __repr__(self) -> str:
        return f"Support({len(self)} points in Z^{self.dim})"


def grid_support(ranges, labels=None) -> Support:
    """Cartesian product of inclusive integer ranges, row-major order.

    ``ranges`` is a sequence of ``(lo, hi)`` pairs; axis ``i`` runs over
    ``lo_i, lo_i + 1, ..., hi_i`` and the last axis varies fastest.
    """
    axes = [np.arange(int(lo), int(hi) + 1, dtype=np.int64) for lo, hi in ranges]
    if not axes or any(a.size == 0 for a in axes):
        raise DegenerateSupportError("each grid axis needs lo <= hi")
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
    return Support(pts, labels=labels)


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability vector aligned to a fixed support.

    Construction clips entries above -1e-12 to zero, rejects anything
    more negative, renormalizes a total mass within 1e-9 of 1, and
    rejects larger deviations.  After construction the vector sums to 1
    to machine precision.
    """

    support: Support
    mass: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.mass, dtype=float).reshape(-1)
        if w.shape[0] != len(self.support):
            raise SupportMismatchError(
                f"mass has {w.shape[0]} entries for {len(self.support)} support points"
            )
        if not np.all(np.isfinite(w)):
            raise ValueError("mass entries must be finite")
        if np.any(w < -ENTRY_CLIP_TOL):
            raise ValueError("mass entries must be nonnegative")
        w = np.maximum(w, 0.0)
        total = float(w.sum())
        if abs(total - 1.0) > MASS_REJECT_TOL:
            raise ValueError(f"mass sums to {total!r}, not 1")
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "mass", w)

    def __len__(self) -> int:
        return len(self.support)

    def __repr__(self) -> str:
        return f"DiscreteDistribution({len(self)} atoms)"


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Draws recorded as indices into a fixed support."""

    support: Support
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices)
        if idx.size and not np.issubdtype(idx.dtype, np.integer):
            raise ValueError("sample indices must be integers")
        idx = idx.astype(np.int64).reshape(-1)
        if idx.shape[0] == 0:
            raise ValueError("a sample set needs at least one draw")
        if idx.min() < 0 or idx.max() >= len(self.support):
            raise ValueError("sample index out of range for the support")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def n(self) -> int:
        return int(self.indices.shape[0])

    def points(self) -> np.ndarray:
        """Coordinates of the draws, shape (n, dim)."""
        return self.support.points[self.indices]


def tv_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Total-variation distance between two distributions on one support.

    Returns 0.5 * ||p - q||_1, which is in [0, 1].  Raises
    SupportMismatchError when the supports differ.
    """
    if p.support != q.support:
        raise SupportMismatchError("tv_distance needs a common support")
    return 0.5 * float(np.abs(p.mass - q.mass).sum())


def expected_value(p: DiscreteDistribution, loss) -> float:
    """Expectation of a loss vector aligned to p's support."""
    vec = np.asarray(loss, dtype=float).reshape(-1)
    if vec.shape[0] != len(p.support):
        raise SupportMismatchError(
            f"loss has {vec.shape[0]} entries for {len(p.support)} support points"
        )
    if not np.all(np.isfinite(vec)):
        raise ValueError("loss entries must be finite")
    return float(p.mass @ vec)


def empirical_distribution(samples: SampleSet) -> DiscreteDistribution:
    """Frequency vector of a sample set on its support."""
    counts = np.bincount(samples.indices, minlength=len(samples.support))
    return DiscreteDistribution(samples.support, counts / samples.n)


def sample(p: DiscreteDistribution, n: int, rng_seed: int) -> SampleSet:
    """Draw n iid points from p.

    Uses inverse-CDF lookup against the cumulative mass with uniforms
    from ``numpy.random.default_rng(rng_seed)`` (PCG64), so the result
    is a deterministic function of (p, n, rng_seed).
    """
    n = int(n)
    if n < 1:
        raise ValueError("need at least one draw")
    rng = np.random.default_rng(rng_seed)
    cdf = np.cumsum(p.mass)
    cdf[-1] = 1.0  # guard against roundoff at the top end
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    idx = np.minimum(idx, len(p.support) - 1)
    return SampleSet(p.support, idx)
