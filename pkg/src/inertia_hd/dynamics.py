"""The damped inertial dynamic behind the solvers, and its parameter conditions.

The trajectory x(t) obeys

    x''(t) + (alpha/t) x'(t) + beta(t) Hess f(x(t)) x'(t) + b(t) grad f(x(t)) = 0

for t >= t0 > 0. The scalar w(t) = b(t) - beta'(t) - beta(t)/t decides the
decay of the energy along trajectories; the checkers below evaluate the
inequalities C1-C5 on w directly from a schedule.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .conditions import ConditionReport, ConditionVerdict, decay_verdict, verdict_from_mask
from .errors import CapabilityError, NumericError
from .problems import ObjectiveSpec

__all__ = [
    "ContinuousSchedule",
    "constant_beta_schedule",
    "corrected_b_schedule",
    "power_b_schedule",
    "power_pair_schedule",
    "TrajectoryPoint",
    "CaseVerdict",
    "w_eval",
    "w_dot_eval",
    "din_avd_acceleration",
    "din_avd_first_order_rhs",
    "first_order_initial_y",
    "integrate_trajectory",
    "check_continuous_conditions",
    "named_case_conditions",
]


@dataclass(frozen=True)
class ContinuousSchedule:
    """Viscous exponent alpha plus the damping/weight functions beta(t), b(t).

    beta_dot (and the optional w_dot) may be supplied analytically; otherwise
    central differences with step 1e-4*t are used. t0 is the left edge of the
    time domain.
    """

    alpha: float
    beta: Callable[[float], float] = None
    b: Callable[[float], float] = None
    beta_dot: Optional[Callable[[float], float]] = None
    b_dot: Optional[Callable[[float], float]] = None
    w_dot: Optional[Callable[[float], float]] = None
    t0: float = 1.0

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if self.beta is None:
            object.__setattr__(self, "beta", lambda t: 0.0)
            if self.beta_dot is None:
                object.__setattr__(self, "beta_dot", lambda t: 0.0)
        if self.b is None:
            object.__setattr__(self, "b", lambda t: 1.0)
            if self.b_dot is None:
                object.__setattr__(self, "b_dot", lambda t: 0.0)


def constant_beta_schedule(alpha: float, beta: float, t0: float = 1.0) -> ContinuousSchedule:
    """Constant damping beta, unit gradient weight: w(t) = 1 - beta/t."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return ContinuousSchedule(
        alpha=alpha,
        beta=lambda t: beta,
        b=lambda t: 1.0,
        beta_dot=lambda t: 0.0,
        b_dot=lambda t: 0.0,
        w_dot=lambda t: beta / t**2,
        t0=t0,
    )


def corrected_b_schedule(alpha: float, beta: float, t0: float = 1.0) -> ContinuousSchedule:
    """Constant damping with b(t) = 1 + beta/t, which makes w identically 1."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return ContinuousSchedule(
        alpha=alpha,
        beta=lambda t: beta,
        b=lambda t: 1.0 + beta / t,
        beta_dot=lambda t: 0.0,
        b_dot=lambda t: -beta / t**2,
        w_dot=lambda t: 0.0,
        t0=t0,
    )


def power_b_schedule(alpha: float, r: float, t0: float = 1.0) -> ContinuousSchedule:
    """No damping, growing gradient weight b(t) = t^r: w(t) = t^r."""
    return ContinuousSchedule(
        alpha=alpha,
        beta=lambda t: 0.0,
        b=lambda t: t**r,
        beta_dot=lambda t: 0.0,
        b_dot=lambda t: r * t ** (r - 1.0),
        w_dot=lambda t: r * t ** (r - 1.0),
        t0=t0,
    )


def power_pair_schedule(
    alpha: float, c: float, b_exp: float, beta_exp: float, t0: float = 1.0
) -> ContinuousSchedule:
    """Power pair b(t) = c*t^b_exp, beta(t) = t^beta_exp.

    w(t) = c*t^b_exp - (beta_exp+1)*t^(beta_exp-1).
    """
    if c <= 0:
        raise ValueError("c must be positive")
    return ContinuousSchedule(
        alpha=alpha,
        beta=lambda t: t**beta_exp,
        b=lambda t: c * t**b_exp,
        beta_dot=lambda t: beta_exp * t ** (beta_exp - 1.0),
        b_dot=lambda t: c * b_exp * t ** (b_exp - 1.0),
        w_dot=lambda t: c * b_exp * t ** (b_exp - 1.0)
        - (beta_exp**2 - 1.0) * t ** (beta_exp - 2.0),
        t0=t0,
    )


def _beta_dot(cs: ContinuousSchedule, t: float) -> float:
    if cs.beta_dot is not None:
        return cs.beta_dot(t)
    d = 1e-4 * t
    return (cs.beta(t + d) - cs.beta(t - d)) / (2.0 * d)


def w_eval(cs: ContinuousSchedule, t: float) -> float:
    """w(t) = b(t) - beta'(t) - beta(t)/t."""
    if t < cs.t0:
        raise ValueError(f"t = {t} is below the domain start t0 = {cs.t0}")
    return cs.b(t) - _beta_dot(cs, t) - cs.beta(t) / t


def w_dot_eval(cs: ContinuousSchedule, t: float) -> float:
    """dw/dt, analytic when the schedule provides it, else central differences.

    The finite-difference step is 1e-4*t (one-sided at the domain edge).
    """
    if t < cs.t0:
        raise ValueError(f"t = {t} is below the domain start t0 = {cs.t0}")
    if cs.w_dot is not None:
        return cs.w_dot(t)
    d = 1e-4 * t
    if t - d >= cs.t0:
        return (w_eval(cs, t + d) - w_eval(cs, t - d)) / (2.0 * d)
    return (w_eval(cs, t + d) - w_eval(cs, t)) / d


def _hessian_vec(obj: ObjectiveSpec, x: np.ndarray, v: np.ndarray, allow_fd: bool) -> np.ndarray:
    if obj.hessian_vec is not None:
        return np.asarray(obj.hessian_vec(x, v), dtype=float)
    if not allow_fd:
        raise CapabilityError("objective has no Hessian-vector oracle and the fallback is disabled")
    if obj.gradient is None:
        raise CapabilityError("Hessian-vector fallback needs a gradient oracle")
    delta = 1e-5 * (1.0 + float(np.linalg.norm(x))) / (1.0 + float(np.linalg.norm(v)))
    return (np.asarray(obj.gradient(x + delta * v)) - np.asarray(obj.gradient(x - delta * v))) / (
        2.0 * delta
    )


def din_avd_acceleration(
    obj: ObjectiveSpec,
    cs: ContinuousSchedule,
    t: float,
    x: np.ndarray,
    v: np.ndarray,
    allow_fd_hessian: bool = True,
) -> np.ndarray:
    """x''(t) of the dynamic: -(alpha/t) v - beta(t) Hess f(x) v - b(t) grad f(x).

    Uses the objective's Hessian-vector oracle, or a central-difference
    directional gradient with step 1e-5*(1+||x||)/(1+||v||) when oracle-less.
    """
    if t < cs.t0:
        raise ValueError(f"t = {t} is below the domain start t0 = {cs.t0}")
    if obj.gradient is None:
        raise CapabilityError("the dynamic needs a gradient oracle")
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    acc = -(cs.alpha / t) * v - cs.b(t) * np.asarray(obj.gradient(x), dtype=float)
    beta_t = cs.beta(t)
    if beta_t != 0.0:
        acc = acc - beta_t * _hessian_vec(obj, x, v, allow_fd_hessian)
    if not np.all(np.isfinite(acc)):
        raise NumericError(f"non-finite acceleration at t = {t}")
    return acc


def din_avd_first_order_rhs(
    obj: ObjectiveSpec, alpha: float, beta: float, t: float, x: np.ndarray, y: np.ndarray
):
    """Hessian-free first-order form for constant beta > 0 and b = 1.

    x' = -beta grad f(x) + (1/beta - alpha/t) x - y/beta
    y' = (1/beta - alpha/t + alpha*beta/t^2) x - y/beta

    Eliminating y recovers the second-order dynamic without evaluating the
    Hessian anywhere.
    """
    if beta <= 0:
        raise ValueError("the first-order form needs constant beta > 0")
    if t <= 0:
        raise ValueError("t must be positive")
    if obj.gradient is None:
        raise CapabilityError("the dynamic needs a gradient oracle")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = np.asarray(obj.gradient(x), dtype=float)
    dx = -beta * g + (1.0 / beta - alpha / t) * x - y / beta
    dy = (1.0 / beta - alpha / t + alpha * beta / t**2) * x - y / beta
    return dx, dy


def first_order_initial_y(
    obj: ObjectiveSpec, alpha: float, beta: float, t0: float, x0: np.ndarray, v0: np.ndarray
) -> np.ndarray:
    """The y0 that makes the first-order form start with x'(t0) = v0."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    g = np.asarray(obj.gradient(x0), dtype=float)
    return beta * (-v0 - beta * g + (1.0 / beta - alpha / t0) * x0)


@dataclass
class TrajectoryPoint:
    """Sample of the trajectory: time, position, velocity."""

    t: float
    x: np.ndarray
    v: np.ndarray


def integrate_trajectory(
    obj: ObjectiveSpec,
    cs: ContinuousSchedule,
    x0,
    v0,
    t_end: float,
    tol: float = 1e-8,
    n_samples: int = 400,
    allow_fd_hessian: bool = True,
) -> list:
    """Integrate the dynamic from (x0, v0) at t0 up to t_end.

    Adaptive Runge-Kutta (4)5 with rtol = tol, atol = tol*1e-3 and first step
    (t_end - t0)*1e-4. Returns TrajectoryPoints at the union of the accepted
    steps and a log-spaced grid of n_samples points. A solver breakdown
    (stiffness) raises NumericError naming the failure time.
    """
    if t_end <= cs.t0:
        raise ValueError(f"t_end must exceed t0 = {cs.t0}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    if x0.shape != v0.shape:
        raise ValueError("x0 and v0 must have the same shape")
    n = x0.shape[0]

    def rhs(t, z):
        x, v = z[:n], z[n:]
        return np.concatenate([v, din_avd_acceleration(obj, cs, t, x, v, allow_fd_hessian)])

    sol = solve_ivp(
        rhs,
        (cs.t0, t_end),
        np.concatenate([x0, v0]),
        method="RK45",
        rtol=tol,
        atol=tol * 1e-3,
        first_step=(t_end - cs.t0) * 1e-4,
        dense_output=True,
    )
    if not sol.success:
        t_fail = float(sol.t[-1]) if len(sol.t) else cs.t0
        raise NumericError(f"integration failed near t = {t_fail:.6g}: {sol.message}")
    grid = np.union1d(sol.t, np.geomspace(cs.t0, t_end, n_samples))
    grid = grid[(grid >= cs.t0) & (grid <= t_end)]
    Z = sol.sol(grid)
    return [TrajectoryPoint(float(t), Z[:n, i].copy(), Z[n:, i].copy()) for i, t in enumerate(grid)]


# ---------------------------------------------------------------------------
# parameter conditions


def check_continuous_conditions(
    cs: ContinuousSchedule, epsilon: Optional[float] = None, grid=None
) -> ConditionReport:
    """Evaluate the decay conditions on w over a time grid.

    C1 : w(t) > 0
    C2 : (alpha-3) w(t) - t w'(t) >= 0
    C3 : (alpha-3) w(t) - t w'(t) >= epsilon * b(t)   (only if epsilon given;
         epsilon must lie in (0, alpha-1))
    C4 : beta(t) / (t w(t)) -> 0      (tail-decay assessment)
    C5 : 1 / (t^2 w(t)) -> 0          (tail-decay assessment)
    """
    if grid is None:
        grid = np.geomspace(cs.t0, cs.t0 * 100.0, 200)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be an increasing 1-d array")
    if grid[0] < cs.t0:
        raise ValueError("grid must start at or after t0")
    if epsilon is not None and not (0 < epsilon < cs.alpha - 1):
        raise ValueError(f"epsilon must lie in (0, alpha-1) = (0, {cs.alpha - 1}), got {epsilon}")

    w = np.array([w_eval(cs, t) for t in grid])
    wd = np.array([w_dot_eval(cs, t) for t in grid])
    bee = np.array([cs.b(t) for t in grid])
    beta = np.array([cs.beta(t) for t in grid])
    c2_lhs = (cs.alpha - 3.0) * w - grid * wd

    verdicts = [
        verdict_from_mask("C1", grid, w > 0),
        verdict_from_mask("C2", grid, c2_lhs >= 0),
    ]
    if epsilon is not None:
        verdicts.append(verdict_from_mask("C3", grid, c2_lhs >= epsilon * bee))
    pos = w > 0
    c4_vals = np.where(pos, beta / np.where(pos, grid * w, 1.0), np.inf)
    c5_vals = np.where(pos, 1.0 / np.where(pos, grid**2 * w, 1.0), np.inf)
    verdicts.append(decay_verdict("C4", grid, c4_vals))
    verdicts.append(decay_verdict("C5", grid, c5_vals))
    return ConditionReport(verdicts=verdicts, grid=grid, epsilon_used=epsilon)


@dataclass
class CaseVerdict:
    """Closed-form admissibility verdict for a named schedule family."""

    case: str
    holds: bool
    reason: str
    t_threshold: Optional[float] = None


def _leading_sign(terms) -> float:
    """Sign of sum(coeff * t^exponent) for large t; exact coefficient algebra."""
    acc = {}
    for coeff, expo in terms:
        acc[expo] = acc.get(expo, 0.0) + coeff
    live = {e: c for e, c in acc.items() if c != 0.0}
    if not live:
        return 0.0
    return math.copysign(1.0, live[max(live)])


def named_case_conditions(case: str, **params) -> CaseVerdict:
    """Closed-form condition regions for the four named schedule families.

    one   : beta(t) = beta, b = 1        -- needs alpha > 3; holds for
            t >= (alpha-2)/(alpha-3) * beta
    two   : beta(t) = beta, b = 1+beta/t -- w = 1; holds iff alpha > 3
    three : beta = 0, b(t) = t^r         -- holds iff alpha >= 3 + r
    four  : b = c*t^b_exp, beta = t^beta_exp -- asymptotic sign analysis of
            w > 0 and (alpha-3)w - t w' >= 0; on the line b_exp = beta_exp - 1
            this is beta_exp < c-1 and beta_exp <= alpha-2
    """
    if case == "one":
        alpha, beta = params["alpha"], params["beta"]
        if beta < 0:
            raise ValueError("beta must be nonnegative")
        if alpha <= 3:
            return CaseVerdict(case, False, f"needs alpha > 3, got alpha = {alpha}")
        thr = (alpha - 2.0) / (alpha - 3.0) * beta
        return CaseVerdict(
            case, True, f"holds for t >= {thr:.6g} (threshold (alpha-2)/(alpha-3)*beta)", thr
        )
    if case == "two":
        alpha = params["alpha"]
        if params.get("beta", 0.0) < 0:
            raise ValueError("beta must be nonnegative")
        if alpha > 3:
            return CaseVerdict(case, True, "w = 1: all conditions hold exactly when alpha > 3")
        return CaseVerdict(case, False, f"needs alpha > 3, got alpha = {alpha}")
    if case == "three":
        alpha, r = params["alpha"], params["r"]
        if alpha >= 3.0 + r:
            return CaseVerdict(case, True, f"alpha >= 3 + r holds ({alpha} >= {3.0 + r})")
        return CaseVerdict(case, False, f"needs alpha >= 3 + r = {3.0 + r}, got alpha = {alpha}")
    if case == "four":
        alpha = params["alpha"]
        c, b_exp, beta_exp = params["c"], params["b_exp"], params["beta_exp"]
        if c <= 0:
            raise ValueError("c must be positive")
        pos = _leading_sign([(c, b_exp), (-(beta_exp + 1.0), beta_exp - 1.0)])
        decay = _leading_sign(
            [
                (c * (alpha - 3.0 - b_exp), b_exp),
                ((beta_exp + 1.0) * (beta_exp + 2.0 - alpha), beta_exp - 1.0),
            ]
        )
        holds = pos > 0 and decay >= 0
        if b_exp == beta_exp - 1.0:
            reason = (
                f"on the line b_exp = beta_exp - 1: needs beta_exp < c-1 = {c - 1.0} "
                f"and beta_exp <= alpha-2 = {alpha - 2.0}"
            )
        else:
            reason = "asymptotic sign analysis of w > 0 and (alpha-3)w - t w' >= 0"
        return CaseVerdict(case, holds, reason)
    raise ValueError(f"unknown case {case!r}; expected one|two|three|four")
