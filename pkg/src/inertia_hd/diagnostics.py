"""Energies, rate fits, and decay probes for runs and trajectories.

The energy functions mirror the decrease certificates of the solvers: a
weighted objective gap plus a squared anchored-momentum norm. They are meant
to be *recomputed* from raw states so tests can verify monotonicity claims
independently of the run loop.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .algorithms import DiscreteSchedule, IGAHDParams, RunState, RunTrace, compute_growth
from .dynamics import ContinuousSchedule, TrajectoryPoint, w_eval
from .problems import ObjectiveSpec

__all__ = [
    "LyapunovSpec",
    "RateFit",
    "lyapunov_continuous",
    "lyapunov_ipahd",
    "lyapunov_igahd",
    "fit_rate_slope",
    "fit_loglog",
    "fit_envelope_slope",
    "summability_probe",
    "count_oscillations",
    "decade_max_ratio",
    "running_max_settled",
    "reinforced_descent_gap",
    "recursion_forcing_terms",
    "TrajectoryTrace",
    "trajectory_trace",
]

GAP_FLOOR = 1e-14


@dataclass
class LyapunovSpec:
    """Anchor data for the energies: weight lam and the minimizer/minimum."""

    lam: Optional[float]
    x_star: np.ndarray
    f_star: float

    def __post_init__(self):
        if self.x_star is not None:
            self.x_star = np.asarray(self.x_star, dtype=float)


def lyapunov_continuous(
    obj: ObjectiveSpec,
    cs: ContinuousSchedule,
    spec: LyapunovSpec,
    point: TrajectoryPoint,
) -> float:
    """Continuous energy at a trajectory point.

    E = delta(t) (f(x) - f*) + 0.5 ||lam (x - x*) + t (v + beta(t) grad f(x))||^2
        + 0.5 lam (alpha - 1 - lam) ||x - x*||^2,
    delta(t) = t^2 w(t) + (alpha - 1 - lam) t beta(t).

    Non-increasing in t along trajectories when the decay conditions hold and
    0 <= lam <= alpha - 1.
    """
    lam = cs.alpha - 1.0 if spec.lam is None else spec.lam
    if not (0.0 <= lam <= cs.alpha - 1.0):
        raise ValueError(f"lam must lie in [0, alpha-1] = [0, {cs.alpha - 1}], got {lam}")
    t, x, v = point.t, np.asarray(point.x, dtype=float), np.asarray(point.v, dtype=float)
    w = w_eval(cs, t)
    delta = t * t * w + (cs.alpha - 1.0 - lam) * t * cs.beta(t)
    c = lam * (cs.alpha - 1.0 - lam)
    diff = x - spec.x_star
    anchored = lam * diff + t * (v + cs.beta(t) * np.asarray(obj.gradient(x), dtype=float))
    return (
        delta * (obj.value(x) - spec.f_star)
        + 0.5 * float(anchored @ anchored)
        + 0.5 * c * float(diff @ diff)
    )


def lyapunov_ipahd(
    obj: ObjectiveSpec,
    sched: DiscreteSchedule,
    spec: LyapunovSpec,
    state: RunState,
    grad: Optional[np.ndarray] = None,
    value: Optional[float] = None,
) -> float:
    """Discrete energy of the proximal iteration at state k.

    E_k = delta_k (f(x_k) - f*) + 0.5 ||lam (x_k - x*) + k (x_k - x_{k-1}
          + beta_k h grad f(x_k))||^2 + 0.5 lam gamma ||x_k - x*||^2.

    grad/value may pass precomputed grad f(x_k) and f(x_k).
    """
    lam = sched.alpha - 1.0 if spec.lam is None else spec.lam
    k = state.k
    _, delta = compute_growth(sched, lam, k)
    gamma = sched.alpha - lam - 1.0
    c = lam * gamma
    x, xp = state.x_curr, state.x_prev
    f_val = obj.value(x) if value is None else value
    mom = x - xp
    beta_k = sched.beta_k(k)
    if beta_k != 0.0:
        g = grad if grad is not None else obj.gradient(x)
        mom = mom + (sched.h * beta_k) * np.asarray(g, dtype=float)
    diff = x - spec.x_star
    anchored = lam * diff + k * mom
    return (
        delta * (f_val - spec.f_star)
        + 0.5 * float(anchored @ anchored)
        + 0.5 * c * float(diff @ diff)
    )


def lyapunov_igahd(
    obj: ObjectiveSpec,
    params: IGAHDParams,
    spec: LyapunovSpec,
    state: RunState,
    grad_prev: Optional[np.ndarray] = None,
    value: Optional[float] = None,
    norm_sq: Optional[Callable[[np.ndarray], float]] = None,
) -> float:
    """Discrete energy of the gradient iteration at state k.

    With t_k = (k-1)/(alpha-1):
    E_k = t_k^2 (f(x_k) - f*)
          + (1/2s) ||x_{k-1} - x* + t_k (x_k - x_{k-1} + beta sqrt(s) grad f(x_{k-1}))||^2.

    norm_sq swaps the squared norm (metric geometries); grad_prev/value pass
    precomputed grad f(x_{k-1}) and f(x_k).
    """
    k = state.k
    t_k = (k - 1.0) / (params.alpha - 1.0)
    f_val = obj.value(state.x_curr) if value is None else value
    g_prev = grad_prev if grad_prev is not None else obj.gradient(state.x_prev)
    v = (state.x_prev - spec.x_star) + t_k * (
        state.x_curr - state.x_prev + params.beta * math.sqrt(params.s) * np.asarray(g_prev, dtype=float)
    )
    nsq = norm_sq if norm_sq is not None else (lambda u: float(u @ u))
    return t_k * t_k * (f_val - spec.f_star) + nsq(v) / (2.0 * params.s)


# ---------------------------------------------------------------------------
# rate fits


@dataclass
class RateFit:
    """Least-squares slope of log(value) against log(index)."""

    slope: float
    intercept: float
    k_lo: float
    k_hi: float
    n_points: int
    residual: float

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "k_lo": self.k_lo,
            "k_hi": self.k_hi,
            "n_points": self.n_points,
            "residual": self.residual,
        }


def fit_loglog(idx, vals, lo: float, hi: float, gap_floor: Optional[float] = GAP_FLOOR) -> RateFit:
    """Core log-log fit over lo <= idx <= hi.

    Values at or below gap_floor are excluded (they carry only rounding noise);
    with gap_floor=None any nonpositive value raises instead.
    """
    if not hi > 2.0 * lo:
        raise ValueError(f"fit range must satisfy hi > 2*lo, got [{lo}, {hi}]")
    idx = np.asarray(idx, dtype=float)
    vals = np.asarray(vals, dtype=float)
    sel = (idx >= lo) & (idx <= hi) & np.isfinite(vals)
    if gap_floor is None:
        if np.any(vals[sel] <= 0):
            raise ValueError(
                "nonpositive values in the fit range; pass a gap_floor to exclude them"
            )
    else:
        sel &= vals > gap_floor
    if sel.sum() < 5:
        raise ValueError(f"too few usable points in [{lo}, {hi}]: {int(sel.sum())}")
    x = np.log(idx[sel])
    y = np.log(vals[sel])
    if x.max() - x.min() < math.log(2.0):
        raise ValueError("usable points span less than a factor of 2 in the index")
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        k_lo=float(idx[sel].min()),
        k_hi=float(idx[sel].max()),
        n_points=int(sel.sum()),
        residual=resid,
    )


def fit_rate_slope(trace: RunTrace, field: str, k_range, gap_floor: Optional[float] = GAP_FLOOR) -> RateFit:
    """Log-log rate fit of a trace field over k_range = (lo, hi)."""
    lo, hi = k_range
    return fit_loglog(trace.k, trace.field(field), lo, hi, gap_floor)


def fit_envelope_slope(
    idx,
    vals,
    lo: float,
    hi: float,
    bins_per_decade: int = 6,
    gap_floor: float = GAP_FLOOR,
) -> RateFit:
    """Log-log slope of the per-bin maxima (upper envelope) of an oscillating signal.

    Bins are log-spaced over [lo, hi]; the fit runs on (bin center, bin max).
    Robust for gaps that swing through near-zeros, where a pointwise fit is
    dominated by the dips.
    """
    if not hi > 2.0 * lo:
        raise ValueError(f"fit range must satisfy hi > 2*lo, got [{lo}, {hi}]")
    idx = np.asarray(idx, dtype=float)
    vals = np.asarray(vals, dtype=float)
    n_bins = max(4, int(round(bins_per_decade * math.log10(hi / lo))))
    edges = np.geomspace(lo, hi, n_bins + 1)
    centers, maxima = [], []
    for i in range(n_bins):
        sel = (idx >= edges[i]) & (idx <= edges[i + 1]) & np.isfinite(vals) & (vals > gap_floor)
        if sel.any():
            centers.append(math.sqrt(edges[i] * edges[i + 1]))
            maxima.append(vals[sel].max())
    if len(centers) < 4:
        raise ValueError("too few populated bins for an envelope fit")
    x = np.log(np.asarray(centers))
    y = np.log(np.asarray(maxima))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        k_lo=float(centers[0]),
        k_hi=float(centers[-1]),
        n_points=len(centers),
        residual=resid,
    )


# ---------------------------------------------------------------------------
# decay probes


def summability_probe(trace: RunTrace, weight: Callable[[float], float], field: str, power: float = 1.0):
    """Partial sum of weight(k) * value^power and the fraction from the final decade.

    Returns (total, tail_fraction); tail = indices above k_max/10. A vanishing
    tail fraction is the numeric signature of a convergent series.
    """
    k = np.asarray(trace.k, dtype=float)
    v = trace.field(field)
    if len(k) == 0:
        return 0.0, 0.0
    terms = np.array([weight(float(ki)) for ki in k]) * np.where(np.isfinite(v), v, 0.0) ** power
    total = float(np.sum(terms))
    tail = float(np.sum(terms[k > k[-1] / 10.0]))
    return total, (tail / total if total > 0 else 0.0)


def count_oscillations(trace: RunTrace, field: str, dead_band: float = 1e-14) -> int:
    """Number of sign changes in the first differences of a trace field.

    Differences with magnitude <= dead_band are treated as flat and skipped,
    so rounding plateaus near the minimum do not count as oscillations.
    """
    v = trace.field(field)
    v = v[np.isfinite(v)]
    if len(v) < 3:
        return 0
    d = np.diff(v)
    signs = np.sign(d)
    signs[np.abs(d) <= dead_band] = 0
    live = signs[signs != 0]
    if len(live) < 2:
        return 0
    return int(np.sum(live[1:] * live[:-1] < 0))


def decade_max_ratio(idx, vals) -> float:
    """max over the final decade divided by max over the middle decade.

    Final decade: idx in (k_hi/10, k_hi]; middle: (k_hi/100, k_hi/10]. A ratio
    well below 1 certifies continued decay of `vals` across the run.
    """
    idx = np.asarray(idx, dtype=float)
    vals = np.asarray(vals, dtype=float)
    hi = idx[-1]
    fin = (idx > hi / 10.0) & (idx <= hi) & np.isfinite(vals)
    mid = (idx > hi / 100.0) & (idx <= hi / 10.0) & np.isfinite(vals)
    if not fin.any() or not mid.any():
        raise ValueError("need data in both the middle and final decade")
    m = float(np.max(vals[mid]))
    f = float(np.max(vals[fin]))
    if m <= 0:
        raise ValueError("middle-decade maximum must be positive")
    return f / m


def running_max_settled(idx, vals, after: float, rel_slack: float = 1e-12) -> bool:
    """True when no value beyond `after` exceeds the running max reached by `after`."""
    idx = np.asarray(idx, dtype=float)
    vals = np.asarray(vals, dtype=float)
    head = vals[idx <= after]
    tail = vals[idx > after]
    if len(head) == 0 or len(tail) == 0:
        raise ValueError("`after` must split the data into nonempty head and tail")
    peak = float(np.max(head))
    return bool(np.all(tail <= peak * (1.0 + rel_slack) + 1e-300))


def reinforced_descent_gap(obj: ObjectiveSpec, s: float, x: np.ndarray, y: np.ndarray) -> float:
    """Residual of the strengthened descent inequality at step size s.

    f(y - s grad f(y)) - [ f(x) + <grad f(y), y - x> - s/2 ||grad f(y)||^2
                           - s/2 ||grad f(x) - grad f(y)||^2 ]
    Nonpositive (up to rounding) whenever s * L <= 1.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gy = np.asarray(obj.gradient(y), dtype=float)
    gx = np.asarray(obj.gradient(x), dtype=float)
    lhs = obj.value(y - s * gy)
    rhs = (
        obj.value(x)
        + float(gy @ (y - x))
        - 0.5 * s * float(gy @ gy)
        - 0.5 * s * float((gx - gy) @ (gx - gy))
    )
    return lhs - rhs


def recursion_forcing_terms(a, alpha: float):
    """Forcing terms of the damped recursion a_{k+1} <= (1 - alpha/k) a_k + w_k.

    Returns w_k = max(0, a_{k+1} - (1 - alpha/k) a_k) for k = 1..len(a)-1.
    When sum k*w_k converges and alpha > 1, the sequence a_k is summable; the
    probe lets tests certify summability claims from raw run data.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or len(a) < 2:
        raise ValueError("need a 1-d sequence with at least two entries")
    k = np.arange(1, len(a), dtype=float)
    return np.maximum(0.0, a[1:] - (1.0 - alpha / k) * a[:-1])


# ---------------------------------------------------------------------------
# trajectory traces


_TRAJ_HEADER = "t,f_gap,grad_norm,velocity_norm,lyapunov"


@dataclass
class TrajectoryTrace:
    """Sampled diagnostics along an integrated trajectory."""

    t: np.ndarray
    f_gap: np.ndarray
    grad_norm: np.ndarray
    velocity_norm: np.ndarray
    lyapunov: np.ndarray

    def __len__(self):
        return len(self.t)

    def field(self, name: str) -> np.ndarray:
        if name not in ("t", "f_gap", "grad_norm", "velocity_norm", "lyapunov"):
            raise ValueError(f"unknown trajectory field {name!r}")
        return getattr(self, name)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(_TRAJ_HEADER + "\n")
            for i in range(len(self.t)):
                cells = [repr(float(self.t[i]))]
                for name in ("f_gap", "grad_norm", "velocity_norm", "lyapunov"):
                    v = getattr(self, name)[i]
                    cells.append("" if np.isnan(v) else repr(float(v)))
                fh.write(",".join(cells) + "\n")

    @classmethod
    def from_csv(cls, path) -> "TrajectoryTrace":
        with open(path) as fh:
            header = fh.readline().strip()
            if header != _TRAJ_HEADER:
                raise ValueError(f"unexpected trajectory header {header!r}")
            cols = [[] for _ in range(5)]
            for line in fh:
                parts = line.rstrip("\n").split(",")
                if len(parts) != 5:
                    raise ValueError(f"malformed trajectory row {line!r}")
                for j in range(5):
                    cols[j].append(float(parts[j]) if parts[j] else np.nan)
        return cls(*[np.asarray(c) for c in cols])


def trajectory_trace(
    obj: ObjectiveSpec,
    cs: ContinuousSchedule,
    points,
    reference=None,
    lam: Optional[float] = None,
) -> TrajectoryTrace:
    """Evaluate gap/gradient/velocity/energy along integrated points."""
    if reference is None and obj.known_minimum is not None:
        reference = (obj.known_minimizer, obj.known_minimum)
    x_star, f_star = (None, None) if reference is None else reference
    spec = None
    if x_star is not None and f_star is not None:
        spec = LyapunovSpec(lam=lam, x_star=np.asarray(x_star, dtype=float), f_star=f_star)
    rows = {name: [] for name in ("t", "f_gap", "grad_norm", "velocity_norm", "lyapunov")}
    for p in points:
        rows["t"].append(p.t)
        rows["f_gap"].append(obj.value(p.x) - f_star if f_star is not None else np.nan)
        rows["grad_norm"].append(
            float(np.linalg.norm(obj.gradient(p.x))) if obj.gradient is not None else np.nan
        )
        rows["velocity_norm"].append(float(np.linalg.norm(p.v)))
        rows["lyapunov"].append(lyapunov_continuous(obj, cs, spec, p) if spec is not None else np.nan)
    return TrajectoryTrace(*[np.asarray(rows[n], dtype=float) for n in ("t", "f_gap", "grad_norm", "velocity_norm", "lyapunov")])
