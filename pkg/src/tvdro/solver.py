"""Decision layer: loss models, plain and robust empirical solvers, and
exact out-of-sample evaluation.

Two loss models are supported.  A :class:`TableLoss` lists finitely many
decisions as rows of a matrix over a fixed point domain; the robust
solve then reduces to one worst-case expectation per row.  A
:class:`RegressionLoss` scores a weight vector w by the squared error of
predicting a point's last coordinate from its remaining coordinates plus
an intercept, with w confined to a box; the robust solve runs projected
subgradient descent on w, calling the exact dual worst-case program at
every iterate for the value and a subgradient.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear

from .ambiguity import AmbiguitySpec
from .distributions import DiscreteDistribution, SampleSet, Support, empirical_distribution
from .errors import ResourceLimitError, SupportMismatchError
from .lp import WorstCaseResult, worst_case_dual

__all__ = [
    "TableLoss",
    "RegressionLoss",
    "SolveResult",
    "DroSolution",
    "solve_true",
    "solve_nsaa",
    "solve_dro",
    "out_of_sample",
]

# Caps and defaults for the robust solve.
MAX_CLEAN_SUPPORT = 256
SUBGRADIENT_MAX_ITER = 5000
SUBGRADIENT_IMPROVEMENT_TOL = 1e-7
SUBGRADIENT_WINDOW = 50

# First-order optimality tolerance for box-constrained least squares.
KKT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TableLoss:
    """Finite decision list with losses tabulated per domain point.

    ``table[j, k]`` is the loss of decision j at the k-th point of
    ``domain``.  Decisions are referred to by row index; optional
    ``decision_labels`` name them for display.
    """

    domain: Support
    table: np.ndarray
    decision_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 2 or t.shape[0] == 0:
            raise ValueError("loss table must be a nonempty 2-d array")
        if t.shape[1] != len(self.domain):
            raise SupportMismatchError(
                f"loss table has {t.shape[1]} columns for {len(self.domain)} domain points"
            )
        if not np.all(np.isfinite(t)):
            raise ValueError("loss table entries must be finite")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        if self.decision_labels is not None:
            labels = tuple(str(s) for s in self.decision_labels)
            if len(labels) != t.shape[0]:
                raise ValueError("expected one label per decision row")
            object.__setattr__(self, "decision_labels", labels)

    @property
    def n_decisions(self) -> int:
        return int(self.table.shape[0])

    def loss_matrix(self, support: Support) -> np.ndarray:
        """Table columns re-indexed to another support's points.

        Every point of ``support`` must appear in the domain (matched by
        exact coordinates); otherwise the loss is undefined there and a
        SupportMismatchError is raised.
        """
        if support == self.domain:
            return self.table
        try:
            idx = [self.domain.index_of(p) for p in support.points]
        except KeyError as exc:
            raise SupportMismatchError(f"loss table does not cover {exc.args[0]}") from None
        return self.table[:, idx]


@dataclass(frozen=True, eq=False)
class RegressionLoss:
    """Squared error of a box-constrained linear predictor.

    For a point xi in Z^m the features are (xi_1, ..., xi_{m-1}, 1) and
    the target is xi_m; a decision w (m-1 slopes plus an intercept) is
    scored by (xi_m - features @ w)^2.  ``lower`` and ``upper`` bound w
    coordinatewise and must be finite with lower < upper.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        up = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != up.shape or lo.ndim != 1 or lo.size < 2:
            raise ValueError("bounds must be equal-length vectors of size >= 2")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(up))):
            raise ValueError("weight bounds must be finite")
        if np.any(lo >= up):
            raise ValueError("need lower < upper in every coordinate")
        lo, up = lo.copy(), up.copy()
        lo.setflags(write=False)
        up.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def n_weights(self) -> int:
        return int(self.lower.size)

    def design(self, support: Support) -> tuple[np.ndarray, np.ndarray]:
        """Feature matrix and target vector for a support."""
        if support.dim != self.n_weights:
            raise SupportMismatchError(
                f"regression with {self.n_weights} weights needs {self.n_weights}-d points, "
                f"got {support.dim}-d"
            )
        pts = support.points.astype(float)
        features = np.hstack([pts[:, :-1], np.ones((pts.shape[0], 1))])
        return features, pts[:, -1]

    def losses(self, w, support: Support) -> np.ndarray:
        """Per-point squared errors of the weight vector w."""
        features, target = self.design(support)
        w = np.asarray(w, dtype=float).reshape(self.n_weights)
        resid = target - features @ w
        return resid * resid

    def box_midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def box_diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Optimal value and decision of a plain (non-robust) solve."""

    value: float
    decision: object  # row index for tables, weight vector for regression


@dataclass(frozen=True, eq=False)
class DroSolution:
    """Robust value, minimizing decision, and the worst case it faces.

    ``converged`` is False when an iterative solve hit its iteration cap
    before the improvement-based stopping rule fired; the best iterate
    found is still returned.
    """

    value: float
    decision: object
    worst_case: WorstCaseResult
    iterations: int | None = None
    converged: bool = True


def _solve_regression(p: DiscreteDistribution, model: RegressionLoss) -> SolveResult:
    features, target = model.design(p.support)
    w = np.sqrt(p.mass)
    a = features * w[:, None]
    b = target * w
    method = "bvls" if a.shape[0] >= a.shape[1] else "trf"
    res = lsq_linear(a, b, bounds=(model.lower, model.upper), method=method, tol=1e-14)
    x = np.clip(res.x, model.lower, model.upper)
    # first-order check: the projected gradient must vanish
    grad = 2.0 * (features.T @ (p.mass * (features @ x - target)))
    projected = x - np.clip(x - grad, model.lower, model.upper)
    if float(np.abs(projected).max()) > KKT_TOL * (1.0 + float(np.abs(grad).max())):
        raise RuntimeError("box least squares failed its optimality check")
    resid = target - features @ x
    return SolveResult(value=float(p.mass @ (resid * resid)), decision=x)


def solve_true(p: DiscreteDistribution, model) -> SolveResult:
    """Exact minimizer of E_p[loss] over the model's decisions.

    Table models take the best row (ties resolved to the lowest index);
    regression models solve box-constrained weighted least squares and
    verify first-order optimality.
    """
    if isinstance(model, TableLoss):
        vals = model.loss_matrix(p.support) @ p.mass
        j = int(np.argmin(vals))
        return SolveResult(value=float(vals[j]), decision=j)
    if isinstance(model, RegressionLoss):
        return _solve_regression(p, model)
    raise TypeError(f"unknown loss model {type(model).__name__}")


def solve_nsaa(samples: SampleSet, model) -> SolveResult:
    """Naive sample-average solve on the observed draws, noise ignored."""
    return solve_true(empirical_distribution(samples), model)


def _table_dro(spec: AmbiguitySpec, model: TableLoss) -> DroSolution:
    losses = model.loss_matrix(spec.channel.input_support)
    results = [worst_case_dual(spec, row) for row in losses]
    values = np.array([r.value for r in results])
    j = int(np.argmin(values))  # ties resolve to the lowest row index
    return DroSolution(value=float(values[j]), decision=j, worst_case=results[j])


_CORNER_SCAN_LIMIT = 16


def _start_point(model: RegressionLoss, worst_case_at, subgradient):
    """Starting iterate whose subgradient norm reflects the problem scale.

    The step constant divides the box diameter by the initial subgradient
    norm, so a start where the gradient is small would produce early steps
    that overshoot into corners the schedule then takes hundreds of
    iterations to escape.  Scanning the box corners (when there are few)
    and starting at the one with the largest worst-case subgradient keeps
    every later step at or below diameter / sqrt(iteration).
    """
    candidates = [model.box_midpoint()]
    if len(model.lower) <= math.log2(_CORNER_SCAN_LIMIT):
        candidates += [
            np.array(corner)
            for corner in itertools.product(*zip(model.lower, model.upper))
        ]
    best = None
    for point in candidates:
        wc = worst_case_at(point)
        norm = float(np.linalg.norm(subgradient(point, wc)))
        if best is None or norm > best[0]:
            best = (norm, point, wc)
    return best[1], best[2], best[0]


def _regression_dro(spec: AmbiguitySpec, model: RegressionLoss,
                    max_iter: int, improvement_tol: float, window: int) -> DroSolution:
    support = spec.channel.input_support
    features, target = model.design(support)

    def worst_case_at(w):
        resid = target - features @ w
        return worst_case_dual(spec, resid * resid)

    def subgradient(w, wc: WorstCaseResult):
        # d/dw of E_Q*[(target - features w)^2]
        resid = features @ w - target
        return 2.0 * (features.T @ (wc.q_star.mass * resid))

    x, wc, g0_norm = _start_point(model, worst_case_at, subgradient)
    step_scale = model.box_diameter() / (g0_norm + 1e-12)

    best_value, best_x, best_wc = wc.value, x.copy(), wc
    last_improvement = 0
    iterations = 0
    stalled = False
    for it in range(1, max_iter + 1):
        iterations = it
        g = subgradient(x, wc)
        x = np.clip(x - (step_scale / math.sqrt(it)) * g, model.lower, model.upper)
        wc = worst_case_at(x)
        if wc.value < best_value - improvement_tol:
            best_value, best_x, best_wc = wc.value, x.copy(), wc
            last_improvement = it
        elif it - last_improvement >= window:
            stalled = True
            break
    return DroSolution(value=float(best_value), decision=best_x,
                       worst_case=best_wc, iterations=iterations,
                       converged=stalled)


def solve_dro(spec: AmbiguitySpec, model, *,
              max_iter: int = SUBGRADIENT_MAX_ITER,
              improvement_tol: float = SUBGRADIENT_IMPROVEMENT_TOL,
              window: int = SUBGRADIENT_WINDOW) -> DroSolution:
    """Minimize the worst-case expectation over the ambiguity set.

    Table models: one exact dual worst-case solve per decision row, then
    the best row (ties to the lowest index).  Regression models:
    projected subgradient on the weights, started from the box midpoint
    or corner with the largest initial subgradient, with step
    (box_diameter / ||g0||) / sqrt(iteration); iteration stops at
    ``max_iter`` or once the best value has not improved by
    ``improvement_tol`` for ``window`` consecutive iterations; the best
    iterate is returned with its worst case.
    """
    if len(spec.channel.input_support) > MAX_CLEAN_SUPPORT:
        raise ResourceLimitError(f"robust solve caps the clean support at {MAX_CLEAN_SUPPORT} points")
    if max_iter < 1 or window < 1 or improvement_tol < 0:
        raise ValueError("bad subgradient settings")
    if isinstance(model, TableLoss):
        return _table_dro(spec, model)
    if isinstance(model, RegressionLoss):
        return _regression_dro(spec, model, max_iter, improvement_tol, window)
    raise TypeError(f"unknown loss model {type(model).__name__}")


def out_of_sample(p: DiscreteDistribution, model, decision) -> float:
    """Exact expected loss of a fixed decision under a known distribution."""
    if isinstance(model, TableLoss):
        j = int(decision)
        if not 0 <= j < model.n_decisions:
            raise ValueError(f"decision index {j} out of range")
        return float(model.loss_matrix(p.support)[j] @ p.mass)
    if isinstance(model, RegressionLoss):
        return float(p.mass @ model.losses(decision, p.support))
    raise TypeError(f"unknown loss model {type(model).__name__}")
