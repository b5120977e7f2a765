"""Dense linear programs with verified optimality certificates, and the
worst-case expectation solvers over channel-constrained TV balls.

The generic solve is backed by scipy's HiGHS interface, but every answer
reported as optimal is re-verified here against four residuals — primal
feasibility, dual feasibility (stationarity and multiplier signs),
complementary slackness, and the duality gap — so a quietly inaccurate
solve surfaces as an explicit ``"failed"`` status instead of a wrong
number.

Worst-case expectation over the clean-space ambiguity set
---------------------------------------------------------

Three independent routes compute sup { E_Q[loss] : Q on the clean
support, d_TV(O*Q, center) <= epsilon }:

* :func:`worst_case_primal` — the direct formulation in Q with slack
  variables for |center - O*Q|;
* :func:`worst_case_dual` — the reformulated program in multipliers
  (lam, mu, r, t), whose value matches the primal exactly and whose
  epigraph-row duals recover the argmax Q*;
* :func:`worst_case_oracle` — brute enumeration of a simplex grid,
  no LP solver involved (small clean supports only).

Serialization: :func:`lp_to_text` / :func:`lp_from_text` write a dense
plain-text form (sizes, then rows; floats in repr precision; ``inf`` and
``-inf`` spell infinite bounds), documented next to the functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .ambiguity import AmbiguitySpec
from .distributions import DiscreteDistribution
from .errors import EmptyAmbiguitySetError, ResourceLimitError

__all__ = [
    "LinearProgram",
    "LpSolution",
    "solve_lp",
    "lp_to_text",
    "lp_from_text",
    "DualCertificate",
    "WorstCaseResult",
    "worst_case_primal",
    "worst_case_dual",
    "worst_case_oracle",
    "min_observable_distance",
]

# Residual tolerance for the optimality certificates; the duality gap is
# measured relative to 1 + |value|.
CERT_TOL = 1e-8

# Hard ceiling on simplex-grid enumeration.
ORACLE_MAX_POINTS = 2_000_000
ORACLE_MAX_SUPPORT = 4

_LINPROG_OPTIONS = {
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}

# Retry options when the fast path misses the certificate tolerances.
# Postsolve after presolve is the usual source of residual slack, so the
# retry solves the original rows directly at the tightest tolerance the
# backend accepts.
_LINPROG_RETRY_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
    "presolve": False,
}

# The public linprog interface re-validates inputs, converts the rows to
# sparse form and re-checks every option on each call; on the small
# programs this package builds that shell costs several times the solve
# itself.  When scipy ships the HiGHS bindings they are called directly
# and the shell is skipped.  Every outcome still runs through the same
# certificate checks, and anything short of a certified optimum falls
# back to the public interface, so the two routes never disagree
# silently.
try:
    from scipy.optimize._highspy import _core as _highs_core
except Exception:  # pragma: no cover - depends on the scipy build
    _highs_core = None


def _build_highs_options():
    opts = _highs_core.HighsOptions()
    opts.output_flag = False
    opts.threads = 1
    opts.primal_feasibility_tolerance = _LINPROG_OPTIONS["primal_feasibility_tolerance"]
    opts.dual_feasibility_tolerance = _LINPROG_OPTIONS["dual_feasibility_tolerance"]
    return opts


_HIGHS_OPTIONS = None if _highs_core is None else _build_highs_options()


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """min or max of c @ x subject to a_ub @ x <= b_ub, a_eq @ x = b_eq,
    lower <= x <= upper.

    Bounds default to free variables; use ``-inf`` / ``inf`` entries for
    one-sided bounds.  Missing constraint blocks may be None.
    """

    sense: str
    c: np.ndarray
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
            raise ValueError("objective must be a finite vector")
        object.__setattr__(self, "c", c)
        n = c.size

        def norm_block(a, b, name):
            if a is None and b is None:
                return None, None
            a = np.asarray(a, dtype=float).reshape(-1, n)
            b = np.atleast_1d(np.asarray(b, dtype=float))
            if a.shape[0] != b.shape[0]:
                raise ValueError(f"{name} matrix and rhs disagree on row count")
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
                raise ValueError(f"{name} block must be finite")
            return a, b

        a_ub, b_ub = norm_block(self.a_ub, self.b_ub, "inequality")
        a_eq, b_eq = norm_block(self.a_eq, self.b_eq, "equality")
        object.__setattr__(self, "a_ub", a_ub)
        object.__setattr__(self, "b_ub", b_ub)
        object.__setattr__(self, "a_eq", a_eq)
        object.__setattr__(self, "b_eq", b_eq)

        lower = np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float).reshape(n)
        upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).reshape(n)
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
            raise ValueError("bounds must satisfy lower <= upper and not be NaN")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_var(self) -> int:
        return int(self.c.size)

    @property
    def n_ineq(self) -> int:
        return 0 if self.a_ub is None else int(self.a_ub.shape[0])

    @property
    def n_eq(self) -> int:
        return 0 if self.a_eq is None else int(self.a_eq.shape[0])


@dataclass(frozen=True, eq=False)
class LpSolution:
    """Result of :func:`solve_lp`.

    ``status`` is one of ``optimal``, ``infeasible``, ``unbounded``,
    ``failed``; value and vectors are None unless optimal.

    Multiplier convention (both senses): ``dual_ineq``, ``reduced_lower``
    and ``reduced_upper`` are nonnegative and satisfy the stationarity
    identity  s*c = -(a_ub^T dual_ineq + a_eq^T dual_eq) + reduced_lower
    - reduced_upper  with s = +1 for min and -1 for max; the matching
    dual objective (see :func:`dual_objective`) equals ``value`` at an
    accepted optimum.  ``certificate`` records the four verified
    residuals.
    """

    status: str
    value: float | None = None
    x: np.ndarray | None = None
    dual_ineq: np.ndarray | None = None
    dual_eq: np.ndarray | None = None
    reduced_lower: np.ndarray | None = None
    reduced_upper: np.ndarray | None = None
    certificate: dict | None = None


def dual_objective(lp: LinearProgram, sol: LpSolution) -> float:
    """Dual objective value under the solution's multiplier convention.

    Terms of infinite bounds are dropped; their multipliers must be zero
    (enforced by the certificate check).
    """
    total = 0.0
    if lp.n_ineq:
        total -= float(sol.dual_ineq @ lp.b_ub)
    if lp.n_eq:
        total -= float(sol.dual_eq @ lp.b_eq)
    finite_lo = np.isfinite(lp.lower)
    finite_up = np.isfinite(lp.upper)
    total += float(sol.reduced_lower[finite_lo] @ lp.lower[finite_lo])
    total -= float(sol.reduced_upper[finite_up] @ lp.upper[finite_up])
    return total if lp.sense == "min" else -total


def check_certificates(lp: LinearProgram, sol: LpSolution) -> dict:
    """Residuals of the four optimality conditions for an optimal solution."""
    x = sol.x
    finite_lo = np.isfinite(lp.lower)
    finite_up = np.isfinite(lp.upper)

    primal = max(
        float(np.max(lp.lower - x, initial=0.0)),
        float(np.max(x - lp.upper, initial=0.0)),
    )
    slack = 0.0
    if lp.n_ineq:
        resid_ub = lp.a_ub @ x - lp.b_ub
        primal = max(primal, float(np.max(resid_ub, initial=0.0)))
        slack = float(np.max(np.abs(sol.dual_ineq * resid_ub), initial=0.0))
    if lp.n_eq:
        primal = max(primal, float(np.max(np.abs(lp.a_eq @ x - lp.b_eq), initial=0.0)))

    sign = 1.0 if lp.sense == "min" else -1.0
    station = sign * lp.c - sol.reduced_lower + sol.reduced_upper
    if lp.n_ineq:
        station += lp.a_ub.T @ sol.dual_ineq
    if lp.n_eq:
        station += lp.a_eq.T @ sol.dual_eq
    dual = float(np.max(np.abs(station)))
    for mult in (sol.dual_ineq, sol.reduced_lower, sol.reduced_upper):
        if mult is not None and mult.size:
            dual = max(dual, float(max(0.0, -mult.min())))
    # multipliers on infinite bounds must vanish
    if not finite_lo.all():
        dual = max(dual, float(np.max(np.abs(sol.reduced_lower[~finite_lo]), initial=0.0)))
    if not finite_up.all():
        dual = max(dual, float(np.max(np.abs(sol.reduced_upper[~finite_up]), initial=0.0)))

    if finite_lo.any():
        slack = max(slack, float(np.max(np.abs(sol.reduced_lower[finite_lo] * (x - lp.lower)[finite_lo]), initial=0.0)))
    if finite_up.any():
        slack = max(slack, float(np.max(np.abs(sol.reduced_upper[finite_up] * (lp.upper - x)[finite_up]), initial=0.0)))

    gap = abs(float(sol.value) - dual_objective(lp, sol))
    return {
        "primal_infeasibility": primal,
        "dual_infeasibility": dual,
        "complementary_slackness": slack,
        "duality_gap": gap,
    }


def _certificates_ok(value: float, cert: dict) -> bool:
    return (
        cert["primal_infeasibility"] <= CERT_TOL
        and cert["dual_infeasibility"] <= CERT_TOL
        and cert["complementary_slackness"] <= CERT_TOL
        and cert["duality_gap"] <= CERT_TOL * (1.0 + abs(value))
    )


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve a dense LP and verify the optimality certificates.

    Deterministic for a fixed input.  A solve that comes back optimal
    but fails any certificate is retried once through the public
    interface without presolve at the backend's tightest tolerance; if
    that still fails it is reported with status ``"failed"`` (residuals
    attached), never as a silent wrong answer.
    """
    if _highs_core is not None:
        sol = _solve_direct(lp)
    else:
        sol = _solve_lp_once(lp, _LINPROG_OPTIONS)
    if sol.status == "failed":
        sol = _solve_lp_once(lp, _LINPROG_RETRY_OPTIONS)
    return sol


def _package_solution(lp: LinearProgram, x, dual_ineq, dual_eq,
                      reduced_lower, reduced_upper) -> LpSolution:
    """Certificate-check a raw optimal solution and attach the residuals."""
    value = float(lp.c @ x)
    sol = LpSolution(
        status="optimal",
        value=value,
        x=x,
        dual_ineq=dual_ineq,
        dual_eq=dual_eq,
        reduced_lower=reduced_lower,
        reduced_upper=reduced_upper,
    )
    cert = check_certificates(lp, sol)
    status = "optimal" if _certificates_ok(value, cert) else "failed"
    return LpSolution(
        status=status,
        value=value,
        x=x,
        dual_ineq=dual_ineq,
        dual_eq=dual_eq,
        reduced_lower=reduced_lower,
        reduced_upper=reduced_upper,
        certificate=cert,
    )


def _solve_direct(lp: LinearProgram) -> LpSolution:
    """Hand the rows straight to the bundled HiGHS bindings.

    Mirrors the public interface's conventions exactly: inequality rows
    are ranged (-inf, b_ub], equality rows are pinned, and the returned
    multipliers are flipped into the nonnegative convention documented
    on LpSolution.  Any status other than a clean optimum/infeasible/
    unbounded answer is reported as "failed" so the caller's retry path
    can disambiguate through the public interface.
    """
    sign = 1.0 if lp.sense == "min" else -1.0
    n = lp.n_var
    m_ub = lp.n_ineq
    m = m_ub + lp.n_eq
    if m_ub and lp.n_eq:
        a_full = np.vstack([lp.a_ub, lp.a_eq])
    elif m_ub:
        a_full = lp.a_ub
    elif lp.n_eq:
        a_full = lp.a_eq
    else:
        a_full = np.zeros((0, n))
    lhs = np.empty(m)
    rhs = np.empty(m)
    if m_ub:
        lhs[:m_ub] = -np.inf
        rhs[:m_ub] = lp.b_ub
    if lp.n_eq:
        lhs[m_ub:] = lp.b_eq
        rhs[m_ub:] = lp.b_eq

    # column-wise nonzeros straight from the dense rows; sparse-matrix
    # classes are much slower to build at these sizes
    at = np.ascontiguousarray(a_full.T)
    cols, rows = np.nonzero(at)

    model = _highs_core.HighsLp()
    model.num_col_ = n
    model.num_row_ = m
    model.col_cost_ = sign * lp.c
    model.col_lower_ = lp.lower
    model.col_upper_ = lp.upper
    model.row_lower_ = lhs
    model.row_upper_ = rhs
    model.a_matrix_.format_ = _highs_core.MatrixFormat.kColwise
    model.a_matrix_.num_col_ = n
    model.a_matrix_.num_row_ = m
    model.a_matrix_.start_ = np.searchsorted(cols, np.arange(n + 1))
    model.a_matrix_.index_ = rows
    model.a_matrix_.value_ = at[cols, rows]

    solver = _highs_core._Highs()
    solver.passOptions(_HIGHS_OPTIONS)
    if solver.passModel(model) == _highs_core.HighsStatus.kError:
        return LpSolution(status="failed")
    if solver.run() == _highs_core.HighsStatus.kError:
        return LpSolution(status="failed")
    status = solver.getModelStatus()
    if status == _highs_core.HighsModelStatus.kInfeasible:
        return LpSolution(status="infeasible")
    if status == _highs_core.HighsModelStatus.kUnbounded:
        return LpSolution(status="unbounded")
    if status != _highs_core.HighsModelStatus.kOptimal:
        return LpSolution(status="failed")

    raw = solver.getSolution()
    col_status = solver.getBasis().col_status
    x = np.asarray(raw.col_value, dtype=float)
    row_dual = np.asarray(raw.row_dual, dtype=float)
    col_dual = np.asarray(raw.col_dual, dtype=float)
    k_lower = _highs_core.HighsBasisStatus.kLower
    k_upper = _highs_core.HighsBasisStatus.kUpper
    at_lower = np.fromiter((s == k_lower for s in col_status), dtype=bool, count=n)
    at_upper = np.fromiter((s == k_upper for s in col_status), dtype=bool, count=n)
    dual_ineq = -row_dual[:m_ub] if m_ub else np.zeros(0)
    dual_eq = -row_dual[m_ub:] if lp.n_eq else np.zeros(0)
    reduced_lower = np.where(at_lower, col_dual, 0.0)
    reduced_upper = -np.where(at_upper, col_dual, 0.0)
    return _package_solution(lp, x, dual_ineq, dual_eq, reduced_lower, reduced_upper)


def _solve_lp_once(lp: LinearProgram, options: dict) -> LpSolution:
    sign = 1.0 if lp.sense == "min" else -1.0
    bounds = [
        (None if not np.isfinite(lo) else float(lo), None if not np.isfinite(up) else float(up))
        for lo, up in zip(lp.lower, lp.upper)
    ]
    res = linprog(
        sign * lp.c,
        A_ub=lp.a_ub,
        b_ub=lp.b_ub,
        A_eq=lp.a_eq,
        b_eq=lp.b_eq,
        bounds=bounds,
        method="highs",
        options=options,
    )
    if res.status == 2:
        return LpSolution(status="infeasible")
    if res.status == 3:
        return LpSolution(status="unbounded")
    if res.status != 0:
        return LpSolution(status="failed")

    x = np.asarray(res.x, dtype=float)
    # HiGHS marginals are sensitivities of the minimized objective; flip
    # them into the nonnegative convention documented on LpSolution.
    dual_ineq = -np.asarray(res.ineqlin.marginals, dtype=float) if lp.n_ineq else np.zeros(0)
    dual_eq = -np.asarray(res.eqlin.marginals, dtype=float) if lp.n_eq else np.zeros(0)
    reduced_lower = np.asarray(res.lower.marginals, dtype=float)
    reduced_upper = -np.asarray(res.upper.marginals, dtype=float)
    return _package_solution(lp, x, dual_ineq, dual_eq, reduced_lower, reduced_upper)


def _fmt_vec(v: np.ndarray) -> str:
    return " ".join(repr(float(t)) for t in v)


def lp_to_text(lp: LinearProgram) -> str:
    """Serialize to the dense plain-text form.

    Layout: a ``lp1`` magic line; ``sense``, ``nvar``, ``nineq``,
    ``neq`` headers; then one line per vector or matrix row, each
    prefixed with its field name (``c``, ``aub``, ``bub``, ``aeq``,
    ``beq``, ``lower``, ``upper``), values space-separated in repr
    precision.
    """
    lines = [
        "lp1",
        f"sense {lp.sense}",
        f"nvar {lp.n_var}",
        f"nineq {lp.n_ineq}",
        f"neq {lp.n_eq}",
        "c " + _fmt_vec(lp.c),
    ]
    for i in range(lp.n_ineq):
        lines.append("aub " + _fmt_vec(lp.a_ub[i]))
    if lp.n_ineq:
        lines.append("bub " + _fmt_vec(lp.b_ub))
    for i in range(lp.n_eq):
        lines.append("aeq " + _fmt_vec(lp.a_eq[i]))
    if lp.n_eq:
        lines.append("beq " + _fmt_vec(lp.b_eq))
    lines.append("lower " + _fmt_vec(lp.lower))
    lines.append("upper " + _fmt_vec(lp.upper))
    return "\n".join(lines) + "\n"


def lp_from_text(text: str) -> LinearProgram:
    """Parse the format written by :func:`lp_to_text`."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0] != "lp1":
        raise ValueError("expected an 'lp1' header line")

    fields: dict[str, list[list[float]]] = {}
    headers: dict[str, str] = {}
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        if key in ("sense", "nvar", "nineq", "neq"):
            headers[key] = rest.strip()
        elif key in ("c", "aub", "bub", "aeq", "beq", "lower", "upper"):
            fields.setdefault(key, []).append([float(t) for t in rest.split()])
        else:
            raise ValueError(f"unknown field {key!r}")
    try:
        sense = headers["sense"]
        nvar, nineq, neq = (int(headers[k]) for k in ("nvar", "nineq", "neq"))
    except KeyError as exc:
        raise ValueError(f"missing header {exc}") from None

    def one_vec(key, expected_len, required=True):
        rows = fields.get(key)
        if rows is None:
            if required:
                raise ValueError(f"missing field {key!r}")
            return None
        if len(rows) != 1 or len(rows[0]) != expected_len:
            raise ValueError(f"field {key!r} has the wrong shape")
        return np.array(rows[0])

    c = one_vec("c", nvar)
    lower = one_vec("lower", nvar)
    upper = one_vec("upper", nvar)
    a_ub = b_ub = a_eq = b_eq = None
    if nineq:
        rows = fields.get("aub", [])
        if len(rows) != nineq or any(len(r) != nvar for r in rows):
            raise ValueError("inequality rows disagree with the declared sizes")
        a_ub = np.array(rows)
        b_ub = one_vec("bub", nineq)
    if neq:
        rows = fields.get("aeq", [])
        if len(rows) != neq or any(len(r) != nvar for r in rows):
            raise ValueError("equality rows disagree with the declared sizes")
        a_eq = np.array(rows)
        b_eq = one_vec("beq", neq)
    return LinearProgram(sense=sense, c=c, a_ub=a_ub, b_ub=b_ub, a_eq=a_eq, b_eq=b_eq,
                         lower=lower, upper=upper)


# ---------------------------------------------------------------------------
# Worst-case expectation over the clean-space ambiguity set.


@dataclass(frozen=True)
class DualCertificate:
    """Multipliers (lam, mu indexed by the observed support, plus the
    epigraph level r and the ball multiplier t) certifying a worst-case
    value from above."""

    lam: np.ndarray
    mu: np.ndarray
    r: float
    t: float

    def objective(self, spec: AmbiguitySpec) -> float:
        """Certified upper bound r + 2 eps t + (mu - lam) @ center."""
        return float(self.r + 2.0 * spec.epsilon * self.t + (self.mu - self.lam) @ spec.center.mass)


@dataclass(frozen=True, eq=False)
class WorstCaseResult:
    value: float
    q_star: DiscreteDistribution
    dual_cert: DualCertificate


def _check_loss(loss, k: int) -> np.ndarray:
    vec = np.atleast_1d(np.asarray(loss, dtype=float))
    if vec.shape != (k,):
        raise ValueError(f"loss must be a vector of length {k}")
    if not np.all(np.isfinite(vec)):
        raise ValueError("loss entries must be finite")
    return vec


def _raise_empty(spec: AmbiguitySpec) -> None:
    dist = min_observable_distance(spec)
    raise EmptyAmbiguitySetError(
        f"no clean distribution reaches the observed ball: minimal achievable "
        f"TV distance {dist:.6g} exceeds radius {spec.epsilon:.6g}",
        min_distance=dist,
    )


def _feasible_cert(loss: np.ndarray, o: np.ndarray, lam, mu, t) -> DualCertificate:
    """Exactly feasible dual certificate from possibly jittery multipliers.

    The LP backend honours bounds and rows only in its internally scaled
    arithmetic, so the returned multipliers can sit a few residual
    tolerances outside the feasible region (magnified further by the
    unit-scale loss normalization).  Clamping signs, lifting t to
    max(lam + mu), and setting r to the exact epigraph-row maximum give a
    certificate that is feasible by construction, hence a true upper
    bound; the objective drift is of residual order and is caught by the
    objective-match validation if it ever grows material.
    """
    lam = np.maximum(np.asarray(lam, dtype=float), 0.0)
    mu = np.maximum(np.asarray(mu, dtype=float), 0.0)
    t = max(float(t), float(np.max(lam + mu, initial=0.0)), 0.0)
    r = float(np.max(loss + o.T @ (lam - mu)))
    return DualCertificate(lam=lam, mu=mu, r=r, t=t)


def _validate_result(spec: AmbiguitySpec, loss: np.ndarray, value: float,
                     q: DiscreteDistribution, cert: DualCertificate) -> None:
    # Residuals of the unit-scale solve grow by the loss scale when the
    # certificate is scaled back, so the absolute part of the tolerance
    # carries that factor alongside the usual relative term.
    tol = CERT_TOL * (max(1.0, float(np.max(np.abs(loss), initial=0.0))) + abs(value))
    # TV distance of the image from the center, on raw arrays: wrapping
    # the image in a distribution object would re-validate it on every solve
    image_gap = 0.5 * float(np.abs(spec.channel.matrix @ q.mass - spec.center.mass).sum())
    if image_gap > spec.epsilon + 1e-8:
        raise RuntimeError("worst-case solve returned an infeasible argmax")
    if abs(float(q.mass @ loss) - value) > 10.0 * tol:
        raise RuntimeError("worst-case argmax does not attain the reported value")
    if cert.lam.min(initial=0.0) < 0.0 or cert.mu.min(initial=0.0) < 0.0:
        raise RuntimeError("worst-case certificate has negative multipliers")
    if np.max(cert.lam + cert.mu - cert.t, initial=0.0) > 1e-10:
        raise RuntimeError("worst-case certificate violates lam + mu <= t")
    if abs(cert.objective(spec) - value) > 10.0 * tol:
        raise RuntimeError("worst-case certificate objective does not match the value")


def worst_case_primal(spec: AmbiguitySpec, loss) -> WorstCaseResult:
    """Direct route: maximize E_Q[loss] over the pulled-back ball.

    Variables are the clean mass Q and per-output slacks s bounding
    |center - (O*Q)|; the ball constraint is sum(s) <= 2 epsilon.  The
    multiplier certificate is read off the constraint duals.
    """
    k = len(spec.channel.input_support)
    kp = len(spec.channel.output_support)
    loss = _check_loss(loss, k)
    o = spec.channel.matrix
    center = spec.center.mass
    # The value is positively homogeneous in the loss, so solve at unit
    # scale; the engine's absolute residual tolerances then apply at any
    # loss magnitude.  The argmax is scale-free; duals scale back up.
    scale = max(1.0, float(np.max(np.abs(loss), initial=0.0)))

    nv = k + kp
    c = np.concatenate([loss / scale, np.zeros(kp)])
    a_ub = np.zeros((2 * kp + 1, nv))
    b_ub = np.zeros(2 * kp + 1)
    a_ub[:kp, :k] = -o
    a_ub[:kp, k:] = -np.eye(kp)
    b_ub[:kp] = -center
    a_ub[kp:2 * kp, :k] = o
    a_ub[kp:2 * kp, k:] = -np.eye(kp)
    b_ub[kp:2 * kp] = center
    a_ub[-1, k:] = 1.0
    b_ub[-1] = 2.0 * spec.epsilon
    a_eq = np.zeros((1, nv))
    a_eq[0, :k] = 1.0
    lower = np.concatenate([np.zeros(k), np.full(kp, -np.inf)])

    sol = solve_lp(LinearProgram(sense="max", c=c, a_ub=a_ub, b_ub=b_ub,
                                 a_eq=a_eq, b_eq=[1.0], lower=lower))
    if sol.status == "infeasible":
        _raise_empty(spec)
    if sol.x is None or sol.dual_ineq is None:
        raise RuntimeError(f"worst-case primal solve ended with status {sol.status!r}")

    # A "failed" status with a solution attached means the backend missed
    # the residual tolerances; the repaired certificate plus the checks in
    # _validate_result decide whether the answer is actually usable.
    q = DiscreteDistribution(spec.channel.input_support, np.maximum(sol.x[:k], 0.0))
    cert = _feasible_cert(
        loss, o,
        scale * sol.dual_ineq[:kp],
        scale * sol.dual_ineq[kp:2 * kp],
        scale * float(sol.dual_ineq[2 * kp]),
    )
    value = scale * float(sol.value)
    _validate_result(spec, loss, value, q, cert)
    return WorstCaseResult(value=value, q_star=q, dual_cert=cert)


def worst_case_dual(spec: AmbiguitySpec, loss) -> WorstCaseResult:
    """Reformulated route: minimize the certificate objective directly.

    Solves  min r + 2 eps t + (mu - lam) @ center  over lam, mu >= 0
    (indexed by the observed support), free r, and t >= 0, subject to
    one epigraph row per clean point,

        loss(x) + sum_x' (lam - mu)(x') O(x'|x) <= r,

    and lam(x') + mu(x') <= t per observed point.  The argmax Q* is the
    vector of epigraph-row duals (their total is 1 by stationarity in
    r); it is validated for feasibility and objective match before
    return.  An unbounded status means the ambiguity set is empty.
    """
    k = len(spec.channel.input_support)
    kp = len(spec.channel.output_support)
    loss = _check_loss(loss, k)
    o = spec.channel.matrix
    center = spec.center.mass
    # Same unit-scale normalization as the primal route: the feasible set
    # is homogeneous, so scaling the loss scales the variables and value.
    scale = max(1.0, float(np.max(np.abs(loss), initial=0.0)))

    nv = 2 * kp + 2  # lam, mu, r, t
    c = np.concatenate([-center, center, [1.0, 0.0]])
    c[-1] = 2.0 * spec.epsilon
    a_ub = np.zeros((k + kp, nv))
    b_ub = np.zeros(k + kp)
    a_ub[:k, :kp] = o.T
    a_ub[:k, kp:2 * kp] = -o.T
    a_ub[:k, 2 * kp] = -1.0
    b_ub[:k] = -loss / scale
    a_ub[k:, :kp] = np.eye(kp)
    a_ub[k:, kp:2 * kp] = np.eye(kp)
    a_ub[k:, 2 * kp + 1] = -1.0
    lower = np.concatenate([np.zeros(2 * kp), [-np.inf, 0.0]])

    sol = solve_lp(LinearProgram(sense="min", c=c, a_ub=a_ub, b_ub=b_ub, lower=lower))
    if sol.status == "unbounded":
        _raise_empty(spec)
    if sol.x is None or sol.dual_ineq is None:
        raise RuntimeError(f"worst-case dual solve ended with status {sol.status!r}")

    # Same policy as the primal route: tolerate a marginal "failed" and
    # let the repaired certificate plus validation have the final word.
    q_raw = np.maximum(sol.dual_ineq[:k], 0.0)
    q = DiscreteDistribution(spec.channel.input_support, q_raw / q_raw.sum())
    cert = _feasible_cert(
        loss, o,
        scale * sol.x[:kp],
        scale * sol.x[kp:2 * kp],
        scale * float(sol.x[2 * kp + 1]),
    )
    value = scale * float(sol.value)
    _validate_result(spec, loss, value, q, cert)
    return WorstCaseResult(value=value, q_star=q, dual_cert=cert)


def _simplex_grid(k: int, m: int) -> np.ndarray:
    """All length-k nonnegative integer vectors summing to m."""
    if k == 1:
        return np.array([[m]], dtype=np.int64)
    blocks = []
    for lead in range(m + 1):
        tail = _simplex_grid(k - 1, m - lead)
        head = np.full((tail.shape[0], 1), lead, dtype=np.int64)
        blocks.append(np.hstack([head, tail]))
    return np.vstack(blocks)


def worst_case_oracle(spec: AmbiguitySpec, loss, grid_step: float) -> float:
    """Brute-force route: enumerate a simplex grid of resolution grid_step.

    Checks ball membership for every grid point (with the standard
    1e-12 boundary slack) and returns the best feasible expectation.
    Pure numpy enumeration — no LP solver involved — which caps the
    clean support at 4 points and the grid at 2e6 nodes.  If no grid
    point is feasible the set is empty at this resolution and the same
    empty-set error as the primal route is raised.
    """
    k = len(spec.channel.input_support)
    loss = _check_loss(loss, k)
    if k > ORACLE_MAX_SUPPORT:
        raise ResourceLimitError(f"grid oracle supports at most {ORACLE_MAX_SUPPORT} clean points")
    grid_step = float(grid_step)
    if not 0.0 < grid_step <= 1.0:
        raise ValueError("grid_step must lie in (0, 1]")
    m = max(1, round(1.0 / grid_step))
    n_points = math.comb(m + k - 1, k - 1)
    if n_points > ORACLE_MAX_POINTS:
        raise ResourceLimitError(f"grid would have {n_points} points (cap {ORACLE_MAX_POINTS})")

    grid = _simplex_grid(k, m).astype(float) / m
    dists = 0.5 * np.abs(grid @ spec.channel.matrix.T - spec.center.mass).sum(axis=1)
    feasible = dists <= spec.epsilon + 1e-12
    if not feasible.any():
        _raise_empty(spec)
    return float((grid[feasible] @ loss).max())


def min_observable_distance(spec: AmbiguitySpec) -> float:
    """Smallest TV distance from the center to the channel's simplex image.

    The ambiguity set is nonempty iff this is <= epsilon.  Solved as a
    small LP: minimize sum(s)/2 with |center - O*Q| <= s over the clean
    simplex.
    """
    k = len(spec.channel.input_support)
    kp = len(spec.channel.output_support)
    o = spec.channel.matrix
    center = spec.center.mass

    nv = k + kp
    c = np.concatenate([np.zeros(k), np.full(kp, 0.5)])
    a_ub = np.zeros((2 * kp, nv))
    b_ub = np.zeros(2 * kp)
    a_ub[:kp, :k] = -o
    a_ub[:kp, k:] = -np.eye(kp)
    b_ub[:kp] = -center
    a_ub[kp:, :k] = o
    a_ub[kp:, k:] = -np.eye(kp)
    b_ub[kp:] = center
    a_eq = np.zeros((1, nv))
    a_eq[0, :k] = 1.0
    lower = np.zeros(nv)

    sol = solve_lp(LinearProgram(sense="min", c=c, a_ub=a_ub, b_ub=b_ub,
                                 a_eq=a_eq, b_eq=[1.0], lower=lower))
    if sol.status != "optimal":
        raise RuntimeError(f"distance solve ended with status {sol.status!r}")
    return max(0.0, float(sol.value))
