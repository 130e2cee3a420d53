"""Proximal operators, the Moreau envelope, and the metric least-squares view.

The metric view turns min 0.5||b - Ax||^2 + g(x) into the minimization of a
smooth function f_M with 1-Lipschitz gradient in the inner product induced by
M = lambda^{-1} I - A^T A (positive definite when lambda * ||A||^2 < 1), so the
smooth inertial solvers apply with unit step.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NumericError
from .problems import ObjectiveSpec, RLSInstance, composite_value

__all__ = [
    "prox_l1",
    "prox_nuclear",
    "prox_smooth_quadratic",
    "moreau_value",
    "moreau_gradient",
    "prox_of_envelope",
    "envelope_objective",
    "MetricRLS",
    "prox_metric_rls",
    "grad_metric_rls",
    "metric_norm",
    "metric_envelope_value",
    "metric_objective",
]


def prox_l1(x: np.ndarray, tau: float) -> np.ndarray:
    """Soft threshold: componentwise argmin_z tau*|z| + 0.5(z-x)^2."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def prox_nuclear(X: np.ndarray, tau: float) -> np.ndarray:
    """Singular-value soft threshold of a matrix."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a matrix")
    try:
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError as e:  # pragma: no cover - numpy SVD rarely fails
        raise NumericError(f"SVD failed in nuclear prox: {e}") from e
    return (U * np.maximum(s - tau, 0.0)) @ Vt


def prox_smooth_quadratic(Q: np.ndarray, c: np.ndarray, x: np.ndarray, lam: float) -> np.ndarray:
    """Prox of lam * (0.5 z^T Q z - c^T z): solves (I + lam Q) z = x + lam c."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    Q = np.asarray(Q, dtype=float)
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    n = x.shape[0]
    if Q.shape != (n, n) or c.shape != (n,):
        raise ValueError("shapes of Q, c, x do not match")
    try:
        return np.linalg.solve(np.eye(n) + lam * Q, x + lam * c)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"quadratic prox solve failed: {e}") from e


def moreau_value(
    f_prox: Callable[[np.ndarray, float], np.ndarray],
    f_value: Callable[[np.ndarray], float],
    x: np.ndarray,
    theta: float,
) -> float:
    """Moreau envelope f_theta(x) = f(p) + ||x-p||^2/(2 theta), p = prox_{theta f}(x)."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    x = np.asarray(x, dtype=float)
    p = f_prox(x, theta)
    d = x - p
    return float(f_value(p)) + float(d @ d) / (2.0 * theta)


def moreau_gradient(
    f_prox: Callable[[np.ndarray, float], np.ndarray],
    x: np.ndarray,
    theta: float,
) -> np.ndarray:
    """Gradient of the Moreau envelope: (x - prox_{theta f}(x)) / theta."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    x = np.asarray(x, dtype=float)
    return (x - f_prox(x, theta)) / theta


def prox_of_envelope(
    f_prox: Callable[[np.ndarray, float], np.ndarray],
    x: np.ndarray,
    lam: float,
    theta: float,
) -> np.ndarray:
    """Prox of lam * f_theta, computed from the prox of f alone.

    prox_{lam f_theta}(x) = theta/(lam+theta) * x + lam/(lam+theta) * prox_{(lam+theta) f}(x).
    """
    if lam <= 0 or theta <= 0:
        raise ValueError("lam and theta must be positive")
    x = np.asarray(x, dtype=float)
    t = theta / (lam + theta)
    return t * x + (1.0 - t) * f_prox(x, lam + theta)


def envelope_objective(obj: ObjectiveSpec, theta: float) -> ObjectiveSpec:
    """Smooth objective for the Moreau envelope of a prox-capable objective.

    The envelope shares minimizers and minimum value with f and has a
    (1/theta)-Lipschitz gradient.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    if obj.prox is None:
        raise ValueError("objective has no prox; cannot build its envelope")

    return ObjectiveSpec(
        value=lambda x: moreau_value(obj.prox, obj.value, x, theta),
        gradient=lambda x: moreau_gradient(obj.prox, x, theta),
        prox=lambda x, lam: prox_of_envelope(obj.prox, x, lam, theta),
        lipschitz=1.0 / theta,
        known_minimum=obj.known_minimum,
        known_minimizer=obj.known_minimizer,
        dim=obj.dim,
    )


@dataclass(frozen=True)
class MetricRLS:
    """A regularized least-squares instance viewed in the metric M = lam^{-1} I - A^T A."""

    instance: RLSInstance
    lam: Optional[float] = None

    def __post_init__(self):
        lam = self.instance.lambda_metric if self.lam is None else self.lam
        if not (0.0 < lam * self.instance.gram_norm < 1.0):
            raise ValueError(
                "metric parameter must satisfy 0 < lam*||A||^2 < 1, got "
                f"{lam * self.instance.gram_norm:.6g}"
            )
        object.__setattr__(self, "lam", float(lam))

    @property
    def dim(self) -> int:
        return self.instance.n


def _reg_prox(inst: RLSInstance, v: np.ndarray, tau: float) -> np.ndarray:
    """prox_{tau * weight * g}(v) for the instance's regularizer."""
    if inst.regularizer == "l1":
        return prox_l1(v, tau * inst.weight)
    if inst.regularizer == "nuclear":
        V = v.reshape(inst.matrix_shape)
        return prox_nuclear(V, tau * inst.weight).reshape(-1)
    return np.asarray(v, dtype=float)


def prox_metric_rls(mr: MetricRLS, x: np.ndarray) -> np.ndarray:
    """Prox of the composite objective in the metric M: prox_{lam g}(x + lam A^T(b - Ax))."""
    inst = mr.instance
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise ValueError(f"x must have shape ({inst.n},), got {x.shape}")
    v = x + mr.lam * (inst.A.T @ (inst.b - inst.A @ x))
    return _reg_prox(inst, v, mr.lam)


def grad_metric_rls(mr: MetricRLS, x: np.ndarray) -> np.ndarray:
    """M-gradient of the metric envelope: x - prox (nonexpansive in the M-norm)."""
    return np.asarray(x, dtype=float) - prox_metric_rls(mr, x)


def metric_norm(mr: MetricRLS, v: np.ndarray) -> float:
    """||v||_M = sqrt(lam^{-1}||v||^2 - ||Av||^2)."""
    v = np.asarray(v, dtype=float)
    Av = mr.instance.A @ v
    sq = float(v @ v) / mr.lam - float(Av @ Av)
    # M is positive definite; tiny negatives can only be roundoff
    return float(np.sqrt(max(sq, 0.0)))


def metric_inner(mr: MetricRLS, u: np.ndarray, v: np.ndarray) -> float:
    """<u, v>_M = lam^{-1} u.v - (Au).(Av)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(u @ v) / mr.lam - float((mr.instance.A @ u) @ (mr.instance.A @ v))


def metric_envelope_value(mr: MetricRLS, x: np.ndarray) -> float:
    """Envelope of the composite objective in the metric M.

    f_M(x) = f(p) + 0.5||p - x||_M^2 at p = prox_metric_rls(mr, x); shares its
    minimum value and minimizers with the composite objective.
    """
    p = prox_metric_rls(mr, x)
    d = p - np.asarray(x, dtype=float)
    return composite_value(mr.instance, p) + 0.5 * metric_norm(mr, d) ** 2


def metric_objective(mr: MetricRLS) -> ObjectiveSpec:
    """Smooth view of the composite problem: value f_M, gradient x - prox.

    The gradient is 1-Lipschitz in the M-norm, so unit step is admissible for
    gradient-based solvers driven in that geometry.
    """
    return ObjectiveSpec(
        value=lambda x: metric_envelope_value(mr, x),
        gradient=lambda x: grad_metric_rls(mr, x),
        lipschitz=1.0,
        dim=mr.dim,
    )


def regularizer_prox(inst: RLSInstance, v: np.ndarray, tau: float) -> np.ndarray:
    """Public wrapper over the instance regularizer prox (used by tests and the CLI)."""
    return _reg_prox(inst, np.asarray(v, dtype=float), tau)


__all__ += ["metric_inner", "regularizer_prox"]
