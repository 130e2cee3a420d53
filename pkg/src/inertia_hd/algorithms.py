"""Inertial first-order solvers with Hessian-driven damping corrections.

Four iterations share the same skeleton: an extrapolation point y_k built from
momentum k/(k+alpha) or 1-alpha/k plus a damping correction formed from
gradient (or prox-residual) differences, followed by a prox or gradient step.

* ipahd      -- proximal step, gradient correction inside the extrapolation
* ipahd_ns   -- prox-only variant: the gradient is replaced by the scaled
                prox residual (x - prox_{theta f}(x))/theta, and the prox step
                acts on the smoothed objective via a convex combination
* igahd      -- explicit gradient step with a gradient-difference correction
* igahd_rls  -- igahd driven by the metric prox residual of a regularized
                least-squares problem (unit Lipschitz constant in that metric)
* fista      -- igahd with the correction switched off (beta = 0)

Growth quantities B_k, delta_k and the conditions G1/G2/G1+/G2+/G3 decide when
the discrete energy of ipahd decays; `validate_discrete_conditions` evaluates
them directly from the schedule.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .conditions import ConditionReport, decay_verdict, verdict_from_mask
from .errors import CapabilityError, NumericError
from .problems import ObjectiveSpec, composite_value
from .prox import (
    MetricRLS,
    grad_metric_rls,
    metric_norm,
    metric_objective,
    moreau_value,
    prox_metric_rls,
)

__all__ = [
    "DiscreteSchedule",
    "constant_schedule",
    "IGAHDParams",
    "RunState",
    "RunTrace",
    "StoppingRule",
    "compute_growth",
    "validate_discrete_conditions",
    "ipahd_step",
    "ipahd_ns_step",
    "igahd_step",
    "igahd_rls_step",
    "run_solver",
    "reference_solution",
    "METHODS",
]

METHODS = ("ipahd", "ipahd_ns", "igahd", "igahd_rls", "fista")


# ---------------------------------------------------------------------------
# parameter containers


@dataclass(frozen=True)
class DiscreteSchedule:
    """Coefficient schedule for the proximal iterations.

    beta_k scales the damping correction, b_k the gradient/prox weight; both
    are functions of the iteration index k >= 1. h is the time-step used to
    tie index k to time t = k*h.
    """

    alpha: float
    h: float = 1.0
    beta_k: Callable[[int], float] = None
    b_k: Callable[[int], float] = None

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")
        if self.beta_k is None:
            object.__setattr__(self, "beta_k", lambda k: 0.0)
        if self.b_k is None:
            object.__setattr__(self, "b_k", lambda k: 1.0)


def constant_schedule(alpha: float, h: float = 1.0, beta: float = 0.0, b: float = 1.0) -> DiscreteSchedule:
    """Schedule with constant beta_k and b_k."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if b < 0:
        raise ValueError("b must be nonnegative")
    return DiscreteSchedule(alpha=alpha, h=h, beta_k=lambda k: beta, b_k=lambda k: b)


@dataclass(frozen=True)
class IGAHDParams:
    """Parameters of the gradient iteration: momentum alpha, damping beta, step s.

    The admissible region is alpha >= 3, s > 0, 0 <= beta < 2*sqrt(s); the
    remaining requirement s*L <= 1 depends on the objective and is enforced by
    the runner.
    """

    alpha: float
    beta: float
    s: float

    def __post_init__(self):
        if not self.alpha >= 3:
            raise ValueError(f"alpha must be >= 3, got {self.alpha}")
        if not self.s > 0:
            raise ValueError(f"s must be positive, got {self.s}")
        if not (0 <= self.beta < 2 * math.sqrt(self.s)):
            raise ValueError(
                f"beta must lie in [0, 2*sqrt(s)) = [0, {2 * math.sqrt(self.s):.6g}), got {self.beta}"
            )


@dataclass
class RunState:
    """Iteration state: index k, the pair (x_{k-1}, x_k), and a cached
    gradient-like vector at x_{k-1} (plain gradient, prox residual, or metric
    residual depending on the method)."""

    k: int
    x_prev: np.ndarray
    x_curr: np.ndarray
    grad_prev: Optional[np.ndarray] = None


@dataclass
class StoppingRule:
    """Optional early-exit tolerances checked against each recorded row."""

    gap_tol: Optional[float] = None
    grad_tol: Optional[float] = None
    velocity_tol: Optional[float] = None


_CSV_HEADER = "k,f_gap,grad_norm,velocity_norm,lyapunov,y_grad_norm"


@dataclass
class RunTrace:
    """Per-iteration diagnostics of a solver run.

    Row k describes iterate x_k and the step taken at k: objective gap at x_k,
    gradient-surrogate norm at x_k, ||x_k - x_{k-1}||, the discrete energy
    E_k, and the gradient norm at the extrapolated point y_k. Unrecorded
    optionals hold NaN and serialize to empty CSV fields.
    """

    k: np.ndarray
    f_gap: np.ndarray
    grad_norm: np.ndarray
    velocity_norm: np.ndarray
    lyapunov: np.ndarray
    y_grad_norm: np.ndarray
    method: str = ""
    dist: Optional[np.ndarray] = None
    iterates: Optional[list] = None
    x_final: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.k)

    def field(self, name: str) -> np.ndarray:
        if name not in ("k", "f_gap", "grad_norm", "velocity_norm", "lyapunov", "y_grad_norm", "dist"):
            raise ValueError(f"unknown trace field {name!r}")
        arr = getattr(self, name)
        if arr is None:
            raise ValueError(f"field {name!r} was not recorded")
        return arr

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(_CSV_HEADER + "\n")
            for i in range(len(self.k)):
                cells = [str(int(self.k[i]))]
                for name in ("f_gap", "grad_norm", "velocity_norm", "lyapunov", "y_grad_norm"):
                    v = getattr(self, name)[i]
                    cells.append("" if np.isnan(v) else repr(float(v)))
                fh.write(",".join(cells) + "\n")

    @classmethod
    def from_csv(cls, path) -> "RunTrace":
        with open(path) as fh:
            header = fh.readline().strip()
            if header != _CSV_HEADER:
                raise ValueError(f"unexpected trace header {header!r}")
            cols = [[] for _ in range(6)]
            for line in fh:
                parts = line.rstrip("\n").split(",")
                if len(parts) != 6:
                    raise ValueError(f"malformed trace row {line!r}")
                cols[0].append(int(parts[0]))
                for j in range(1, 6):
                    cols[j].append(float(parts[j]) if parts[j] else np.nan)
        return cls(
            k=np.asarray(cols[0]),
            f_gap=np.asarray(cols[1]),
            grad_norm=np.asarray(cols[2]),
            velocity_norm=np.asarray(cols[3]),
            lyapunov=np.asarray(cols[4]),
            y_grad_norm=np.asarray(cols[5]),
        )


# ---------------------------------------------------------------------------
# growth quantities and discrete conditions


def compute_growth(sched: DiscreteSchedule, lam: float, k: int):
    """Growth pair (B_k, delta_k) controlling the discrete energy decay.

    B_k = k*(h*b_k + beta_k - beta_{k+1}) - beta_{k+1}
    delta_k = h*((k+1+gamma)*B_k + gamma*(k+1)*beta_{k+1}),  gamma = alpha-lam-1
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if not (0 < lam <= sched.alpha - 1):
        raise ValueError(f"lam must lie in (0, alpha-1] = (0, {sched.alpha - 1}], got {lam}")
    h = sched.h
    beta_next = sched.beta_k(k + 1)
    B = k * (h * sched.b_k(k) + sched.beta_k(k) - beta_next) - beta_next
    gamma = sched.alpha - lam - 1.0
    delta = h * ((k + 1 + gamma) * B + gamma * (k + 1) * beta_next)
    return float(B), float(delta)


def validate_discrete_conditions(
    sched: DiscreteSchedule,
    lam: float,
    k_max: int,
    epsilon: Optional[float] = None,
    B_lower: Optional[float] = None,
) -> ConditionReport:
    """Evaluate the energy-decay conditions over k = 1..k_max.

    G1  : B_k > 0
    G2  : delta_{k+1} - delta_k - h*lam*B_k <= 0
    G1+ : B_k >= B_lower                       (only if B_lower given)
    G2+ : delta_{k+1} - delta_k - h*lam*B_k <= -epsilon*h*B_k  (only if epsilon given)
    G3  : beta_{k+1}/B_k -> 0, assessed as tail decay over the final decade

    Each verdict carries the first violating k and the first k from which the
    condition holds through k_max.
    """
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    if epsilon is not None and not (0 < epsilon <= lam):
        raise ValueError(f"epsilon must lie in (0, lam] = (0, {lam}], got {epsilon}")
    ks = np.arange(1, k_max + 1)
    B = np.empty(k_max + 1)
    delta = np.empty(k_max + 1)
    for i, k in enumerate(range(1, k_max + 2)):
        B[i], delta[i] = compute_growth(sched, lam, k)
    Bk = B[:-1]
    g2_lhs = delta[1:] - delta[:-1] - sched.h * lam * Bk

    grid = ks.astype(float)
    verdicts = [
        verdict_from_mask("G1", grid, Bk > 0),
        verdict_from_mask("G2", grid, g2_lhs <= 0),
    ]
    if B_lower is not None:
        verdicts.append(verdict_from_mask("G1+", grid, Bk >= B_lower))
    if epsilon is not None:
        verdicts.append(verdict_from_mask("G2+", grid, g2_lhs <= -epsilon * sched.h * Bk))
    beta_next = np.array([sched.beta_k(k + 1) for k in ks], dtype=float)
    ratio = np.where(Bk > 0, beta_next / np.where(Bk > 0, Bk, 1.0), np.inf)
    verdicts.append(decay_verdict("G3", grid, ratio))
    return ConditionReport(
        verdicts=verdicts,
        grid=grid,
        epsilon_used=epsilon,
        extras={"lam": lam, "B_lower": B_lower},
    )


# ---------------------------------------------------------------------------
# single steps


def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def ipahd_step(obj: ObjectiveSpec, sched: DiscreteSchedule, st: RunState):
    """One proximal step with gradient correction.

    y_k = x_k + a_k*(x_k - x_{k-1}) + h*a_k*beta_k*grad f(x_k),  a_k = k/(k+alpha)
    x_{k+1} = prox_{lam_k f}(y_k),  lam_k = h*k*(beta_k + h*b_k)/(k+alpha)

    Returns (next state, y_k). The next state caches grad f(x_k) when it was
    needed (beta_k != 0) or when a gradient oracle exists.
    """
    if obj.prox is None:
        raise CapabilityError("ipahd needs a prox oracle on the objective")
    k = st.k
    _require(k >= 1, f"iteration index must be >= 1, got {k}")
    h, alpha = sched.h, sched.alpha
    beta = sched.beta_k(k)
    b = sched.b_k(k)
    a_k = k / (k + alpha)
    lam_k = h * k * (beta + h * b) / (k + alpha)
    _require(lam_k > 0, f"schedule gives nonpositive prox parameter lam_{k} = {lam_k}")
    y = st.x_curr + a_k * (st.x_curr - st.x_prev)
    g_k = None
    if beta != 0.0:
        if obj.gradient is None:
            raise CapabilityError("schedule has beta_k != 0 but the objective has no gradient")
        g_k = obj.gradient(st.x_curr)
        y = y + (h * a_k * beta) * g_k
    elif obj.gradient is not None:
        g_k = obj.gradient(st.x_curr)
    x_next = obj.prox(y, lam_k)
    return RunState(k + 1, st.x_curr, x_next, grad_prev=g_k), y


def ipahd_ns_step(
    g_prox: Callable[[np.ndarray, float], np.ndarray],
    sched: DiscreteSchedule,
    theta: float,
    st: RunState,
):
    """One prox-only step on the theta-smoothed objective.

    mu_k = theta*(k+alpha) / (theta*(k+alpha) + h*k*(beta_k + h*b_k))
    y_k  = x_k + a_k*(x_k - x_{k-1}) + (beta_k*h/theta)*a_k*(x_k - prox_{theta f}(x_k))
    x_{k+1} = mu_k*y_k + (1-mu_k)*prox_{(theta/mu_k) f}(y_k)

    Returns (next state, y_k); the cached vector is the prox residual
    (x_k - prox_{theta f}(x_k))/theta, the smoothed objective's gradient.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    k = st.k
    _require(k >= 1, f"iteration index must be >= 1, got {k}")
    h, alpha = sched.h, sched.alpha
    beta = sched.beta_k(k)
    b = sched.b_k(k)
    lam_weight = h * k * (beta + h * b)
    _require(lam_weight > 0, f"schedule gives nonpositive prox parameter at k={k}")
    mu_k = theta * (k + alpha) / (theta * (k + alpha) + lam_weight)
    a_k = k / (k + alpha)
    p_k = g_prox(st.x_curr, theta)
    y = st.x_curr + a_k * (st.x_curr - st.x_prev)
    if beta != 0.0:
        y = y + (beta * h / theta) * a_k * (st.x_curr - p_k)
    x_next = mu_k * y + (1.0 - mu_k) * g_prox(y, theta / mu_k)
    residual = (st.x_curr - p_k) / theta
    return RunState(k + 1, st.x_curr, x_next, grad_prev=residual), y


def igahd_step(obj: ObjectiveSpec, p: IGAHDParams, st: RunState):
    """One gradient step with gradient-difference correction.

    y_k = x_k + (1-alpha/k)*(x_k - x_{k-1})
          - beta*sqrt(s)*(grad f(x_k) - grad f(x_{k-1})) - (beta*sqrt(s)/k)*grad f(x_{k-1})
    x_{k+1} = y_k - s*grad f(y_k)

    Returns (next state, y_k, grad f(y_k)).
    """
    if obj.gradient is None:
        raise CapabilityError("igahd needs a gradient oracle on the objective")
    k = st.k
    _require(k >= 1, f"iteration index must be >= 1, got {k}")
    a_k = 1.0 - p.alpha / k
    g_k = obj.gradient(st.x_curr)
    g_prev = st.grad_prev if st.grad_prev is not None else obj.gradient(st.x_prev)
    bs = p.beta * math.sqrt(p.s)
    y = st.x_curr + a_k * (st.x_curr - st.x_prev) - bs * (g_k - g_prev) - (bs / k) * g_prev
    g_y = obj.gradient(y)
    x_next = y - p.s * g_y
    return RunState(k + 1, st.x_curr, x_next, grad_prev=g_k), y, g_y


def igahd_rls_step(mr: MetricRLS, p: IGAHDParams, st: RunState, lagged: bool = False):
    """One step on a regularized least-squares problem in its contraction metric.

    The gradient role is played by the metric prox residual
    z_k = x_k - prox_{lam g}(x_k + lam*A^T(b - A x_k)), which is 1-Lipschitz in
    the metric, so s <= 1 is admissible. By default the 1/k correction uses the
    current residual z_k; lagged=True uses z_{k-1}, which makes the step agree
    exactly with igahd_step driven by the metric residual.

    Returns (next state, y_k, metric residual at y_k).
    """
    k = st.k
    _require(k >= 1, f"iteration index must be >= 1, got {k}")
    z_k = grad_metric_rls(mr, st.x_curr)
    z_prev = st.grad_prev if st.grad_prev is not None else grad_metric_rls(mr, st.x_prev)
    a_k = 1.0 - p.alpha / k
    bs = p.beta * math.sqrt(p.s)
    corr = z_prev if lagged else z_k
    y = st.x_curr + a_k * (st.x_curr - st.x_prev) - bs * (z_k - z_prev) - (bs / k) * corr
    p_y = prox_metric_rls(mr, y)
    x_next = (1.0 - p.s) * y + p.s * p_y
    return RunState(k + 1, st.x_curr, x_next, grad_prev=z_k), y, y - p_y


# ---------------------------------------------------------------------------
# run driver


def _init_pair(dim: Optional[int], x0, x1):
    if x0 is None:
        if dim is None:
            raise ValueError("cannot infer the problem dimension; pass x0")
        x0 = np.zeros(dim)
    x0 = np.asarray(x0, dtype=float)
    x1 = x0 if x1 is None else np.asarray(x1, dtype=float)
    if x0.shape != x1.shape:
        raise ValueError("x0 and x1 must have the same shape")
    return x0.copy(), x1.copy()


def run_solver(
    method: str,
    problem,
    params,
    max_iter: int,
    stop: Optional[StoppingRule] = None,
    *,
    x0=None,
    x1=None,
    k_start: Optional[int] = None,
    reference=None,
    lyapunov_lambda: Optional[float] = None,
    theta: Optional[float] = None,
    record_lyapunov: bool = True,
    record_iterates: bool = False,
    lagged_correction: bool = False,
) -> RunTrace:
    """Run one of the inertial methods and collect a RunTrace.

    method      one of ipahd | ipahd_ns | igahd | igahd_rls | fista
    problem     ObjectiveSpec (MetricRLS for igahd_rls)
    params      DiscreteSchedule for the proximal family, IGAHDParams otherwise
    reference   optional (x_star, f_star) pair; defaults to the problem's known
                minimizer/minimum. Without a reference, gap/lyapunov are NaN.
    k_start     first iteration index; defaults to 1 for the proximal family
                and ceil(alpha)+1 for the gradient family (so 1-alpha/k >= 0).
    x0, x1      warm-start pair x_{k_start-1}, x_{k_start}; default zeros, x1=x0.

    Performs max_iter steps, recording one row per step: row k holds the
    quantities of iterate x_k and the extrapolation y_k computed from it.
    """
    from . import diagnostics  # local import to avoid a cycle

    method = method.lower()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if max_iter < 0:
        raise ValueError("max_iter must be >= 0")
    stop = stop or StoppingRule()

    label = method
    if method == "fista":
        # the beta = 0 specialization, sharing the exact same code path
        if not isinstance(params, IGAHDParams):
            raise ValueError("fista expects IGAHDParams")
        params = replace(params, beta=0.0)
        method = "igahd_rls" if isinstance(problem, MetricRLS) else "igahd"

    euclid = np.linalg.norm
    norm = euclid
    mobj = None

    if method == "igahd_rls":
        if not isinstance(problem, MetricRLS):
            raise ValueError("igahd_rls expects a MetricRLS problem")
        if not isinstance(params, IGAHDParams):
            raise ValueError("igahd_rls expects IGAHDParams")
        if params.s > 1.0 + 1e-12:
            raise ValueError(
                f"step violates s*L <= 1: the metric residual has L = 1, got s = {params.s}"
            )
        mr = problem
        mobj = metric_objective(mr)
        norm = lambda v: metric_norm(mr, v)  # noqa: E731
        dim = mr.dim
    elif method == "igahd":
        if not isinstance(problem, ObjectiveSpec):
            raise ValueError(f"{method} expects an ObjectiveSpec problem")
        if not isinstance(params, IGAHDParams):
            raise ValueError(f"{method} expects IGAHDParams")
        if problem.gradient is None:
            raise CapabilityError(f"{method} needs a gradient oracle")
        if problem.lipschitz is not None and params.s * problem.lipschitz > 1.0 + 1e-12:
            raise ValueError(
                f"step violates s*L <= 1: s = {params.s}, L = {problem.lipschitz:.6g}"
            )
        dim = problem.dim
    else:  # ipahd, ipahd_ns
        if not isinstance(problem, ObjectiveSpec):
            raise ValueError(f"{method} expects an ObjectiveSpec problem")
        if not isinstance(params, DiscreteSchedule):
            raise ValueError(f"{method} expects a DiscreteSchedule")
        if problem.prox is None:
            raise CapabilityError(f"{method} needs a prox oracle")
        if method == "ipahd_ns":
            if theta is None or theta <= 0:
                raise ValueError("ipahd_ns needs theta > 0")
        dim = problem.dim

    if k_start is None:
        k_start = math.ceil(params.alpha) + 1 if isinstance(params, IGAHDParams) else 1
    if k_start < 1:
        raise ValueError("k_start must be >= 1")

    if reference is None and isinstance(problem, ObjectiveSpec) and problem.known_minimum is not None:
        reference = (problem.known_minimizer, problem.known_minimum)
    x_star, f_star = (None, None) if reference is None else reference
    if x_star is not None:
        x_star = np.asarray(x_star, dtype=float)

    x_prev, x_curr = _init_pair(dim, x0, x1)
    lam = lyapunov_lambda
    if lam is None and isinstance(params, DiscreteSchedule):
        lam = params.alpha - 1.0
    lspec = None
    if record_lyapunov and x_star is not None and f_star is not None:
        lspec = diagnostics.LyapunovSpec(lam=lam, x_star=x_star, f_star=f_star)

    # method-specific closures ------------------------------------------------
    if method == "igahd_rls":
        inst = mr.instance
        grad0 = grad_metric_rls(mr, x_prev)

        def step_fn(st):
            return igahd_rls_step(mr, params, st, lagged=lagged_correction)

        def gap_fn(x, g):
            # g is the metric residual at x; x - g is the prox point
            return composite_value(inst, x - g)

        def lyap_fn(st, g_curr, val, gn):
            # smoothed metric value from the prox-point value and residual norm
            f_m = val + 0.5 * gn * gn
            return diagnostics.lyapunov_igahd(
                mobj, params, lspec, st,
                grad_prev=st.grad_prev, value=f_m, norm_sq=lambda v: norm(v) ** 2,
            )

    elif method == "igahd":
        obj = problem
        grad0 = obj.gradient(x_prev)

        def step_fn(st):
            return igahd_step(obj, params, st)

        def gap_fn(x, g):
            return obj.value(x)

        def lyap_fn(st, g_curr, val, gn):
            return diagnostics.lyapunov_igahd(obj, params, lspec, st, grad_prev=st.grad_prev, value=val)

    elif method == "ipahd":
        obj = problem
        grad0 = obj.gradient(x_prev) if obj.gradient is not None else None

        def step_fn(st):
            out = ipahd_step(obj, params, st)
            return out[0], out[1], None

        def gap_fn(x, g):
            return obj.value(x)

        def lyap_fn(st, g_curr, val, gn):
            return diagnostics.lyapunov_ipahd(obj, params, lspec, st, grad=g_curr, value=val)

    else:  # ipahd_ns
        obj = problem
        grad0 = (x_prev - obj.prox(x_prev, theta)) / theta

        def step_fn(st):
            out = ipahd_ns_step(obj.prox, params, theta, st)
            return out[0], out[1], None

        def gap_fn(x, g):
            # smoothed objective value from the residual g = (x - prox)/theta
            p = x - theta * g
            return obj.value(p) + 0.5 * theta * float(g @ g)

        def lyap_fn(st, g_curr, val, gn):
            return diagnostics.lyapunov_ipahd(obj, params, lspec, st, grad=g_curr, value=val)

    st = RunState(k_start, x_prev, x_curr, grad_prev=grad0)
    cols = {name: [] for name in ("k", "f_gap", "grad_norm", "velocity_norm", "lyapunov", "y_grad_norm")}
    dist_rows = []
    iterates = [] if record_iterates else None

    for _ in range(max_iter):
        k = st.k
        try:
            st_next, y, g_y = step_fn(st)
        except FloatingPointError as e:  # pragma: no cover
            raise NumericError(f"{method} failed at iteration k={k}: {e}") from e
        if not np.all(np.isfinite(st_next.x_curr)):
            raise NumericError(f"{method} produced non-finite iterates at iteration k={k}")
        g_curr = st_next.grad_prev

        val = gap_fn(st.x_curr, g_curr)
        gap = val - f_star if f_star is not None else np.nan
        gn = norm(g_curr) if g_curr is not None else np.nan
        vn = norm(st.x_curr - st.x_prev)
        ly = lyap_fn(st, g_curr, val, gn) if lspec is not None else np.nan
        ygn = norm(g_y) if g_y is not None else np.nan

        cols["k"].append(k)
        cols["f_gap"].append(gap)
        cols["grad_norm"].append(gn)
        cols["velocity_norm"].append(vn)
        cols["lyapunov"].append(ly)
        cols["y_grad_norm"].append(ygn)
        if x_star is not None:
            dist_rows.append(euclid(st.x_curr - x_star))
        if iterates is not None:
            iterates.append(st.x_curr.copy())

        if stop.gap_tol is not None and np.isfinite(gap) and gap <= stop.gap_tol:
            st = st_next
            break
        if stop.grad_tol is not None and np.isfinite(gn) and gn <= stop.grad_tol:
            st = st_next
            break
        if stop.velocity_tol is not None and vn <= stop.velocity_tol:
            st = st_next
            break
        st = st_next

    return RunTrace(
        k=np.asarray(cols["k"], dtype=int),
        f_gap=np.asarray(cols["f_gap"], dtype=float),
        grad_norm=np.asarray(cols["grad_norm"], dtype=float),
        velocity_norm=np.asarray(cols["velocity_norm"], dtype=float),
        lyapunov=np.asarray(cols["lyapunov"], dtype=float),
        y_grad_norm=np.asarray(cols["y_grad_norm"], dtype=float),
        method=label,
        dist=np.asarray(dist_rows, dtype=float) if dist_rows else None,
        iterates=iterates,
        x_final=st.x_curr,
    )


def reference_solution(problem, budget: int, alpha: float = 4.0, beta: float = 0.5):
    """High-accuracy pre-solve: returns (x_star, f_star).

    For MetricRLS problems runs the metric iteration at unit step for `budget`
    iterations and takes the best prox-point value seen; smooth objectives with
    a known minimum return it directly, otherwise the gradient iteration at
    s = 1/L is used.
    """
    if isinstance(problem, MetricRLS):
        tr = run_solver(
            "igahd_rls", problem, IGAHDParams(alpha, beta, 1.0), budget,
            reference=(None, 0.0), record_lyapunov=False,
        )
        p = prox_metric_rls(problem, tr.x_final)
        f_best = float(min(np.nanmin(tr.f_gap), composite_value(problem.instance, p)))
        return p, f_best
    if not isinstance(problem, ObjectiveSpec):
        raise ValueError("reference_solution expects an ObjectiveSpec or MetricRLS")
    if problem.known_minimum is not None:
        return problem.known_minimizer, problem.known_minimum
    if problem.gradient is not None:
        if problem.lipschitz is None:
            raise ValueError("need a Lipschitz constant to pick the pre-solve step")
        s = 1.0 / problem.lipschitz
        params = IGAHDParams(alpha, min(beta, 1.9 * math.sqrt(s)), s)
        tr = run_solver("igahd", problem, params, budget, reference=(None, 0.0), record_lyapunov=False)
        return tr.x_final, float(np.nanmin(tr.f_gap))
    raise CapabilityError("cannot pre-solve a problem without gradient or known minimum")
