"""Test problems: quadratics, regularized least squares, and gradient checks.

Problem objects bundle value/gradient/prox oracles so the solvers and the ODE
integrator can stay agnostic of where the objective came from.
"""

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NumericError

__all__ = [
    "ObjectiveSpec",
    "RLSInstance",
    "quadratic_value_grad",
    "quadratic_objective",
    "least_squares_objective",
    "abs_objective",
    "finite_diff_gradient_check",
    "estimate_lipschitz",
    "gen_lasso_instance",
    "gen_lowrank_instance",
    "composite_value",
    "regularizer_value",
    "instance_to_json",
    "instance_from_json",
]


@dataclass(frozen=True)
class ObjectiveSpec:
    """A convex objective described by callables.

    value and gradient are mandatory for smooth solvers; prox (of ``lam * f``)
    is mandatory for proximal solvers; hessian_vec may be None, in which case
    consumers fall back to finite differences. known_minimum / known_minimizer
    are used for gap curves and Lyapunov references when available.
    """

    value: Callable[[np.ndarray], float]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    hessian_vec: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    lipschitz: Optional[float] = None
    known_minimum: Optional[float] = None
    known_minimizer: Optional[np.ndarray] = None
    dim: Optional[int] = None


def _as_vector(x, name="x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {x.shape}")
    return x


def quadratic_value_grad(Q: np.ndarray, c: np.ndarray, x: np.ndarray):
    """Value and gradient of f(x) = 0.5 x^T Q x - c^T x.

    Returns
    -------
    (float, ndarray)
    """
    Q = np.asarray(Q, dtype=float)
    c = _as_vector(c, "c")
    x = _as_vector(x)
    n = x.shape[0]
    if Q.shape != (n, n):
        raise ValueError(f"Q must be ({n},{n}) to match x, got {Q.shape}")
    if c.shape[0] != n:
        raise ValueError(f"c has length {c.shape[0]}, expected {n}")
    if not np.allclose(Q, Q.T, rtol=1e-10, atol=1e-12):
        raise ValueError("Q must be symmetric")
    Qx = Q @ x
    val = 0.5 * float(x @ Qx) - float(c @ x)
    grad = Qx - c
    if not np.isfinite(val) or not np.all(np.isfinite(grad)):
        raise NumericError("quadratic evaluation produced non-finite values")
    return val, grad


def quadratic_objective(Q: np.ndarray, c: Optional[np.ndarray] = None) -> ObjectiveSpec:
    """ObjectiveSpec for f(x) = 0.5 x^T Q x - c^T x with Q symmetric PSD."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    c = np.zeros(n) if c is None else _as_vector(c, "c")
    if Q.shape != (n, n) or c.shape[0] != n:
        raise ValueError("Q must be square and match c")
    if not np.allclose(Q, Q.T, rtol=1e-10, atol=1e-12):
        raise ValueError("Q must be symmetric")

    def value(x):
        return 0.5 * float(x @ (Q @ x)) - float(c @ x)

    def gradient(x):
        return Q @ x - c

    def hessian_vec(x, v):
        return Q @ v

    def prox(x, lam):
        # argmin_z lam*f(z) + 0.5||z-x||^2  <=>  (I + lam Q) z = x + lam c
        from .prox import prox_smooth_quadratic

        return prox_smooth_quadratic(Q, c, x, lam)

    eigs = np.linalg.eigvalsh(Q)
    if eigs[0] < -1e-10 * max(1.0, abs(eigs[-1])):
        raise ValueError("Q must be positive semidefinite")
    if c.any():
        x_star = np.linalg.lstsq(Q, c, rcond=None)[0]
    else:
        x_star = np.zeros(n)
    return ObjectiveSpec(
        value=value,
        gradient=gradient,
        prox=prox,
        hessian_vec=hessian_vec,
        lipschitz=float(eigs[-1]),
        known_minimum=value(x_star),
        known_minimizer=x_star,
        dim=n,
    )


def least_squares_objective(A: np.ndarray, b: np.ndarray) -> ObjectiveSpec:
    """ObjectiveSpec for the smooth part f(x) = 0.5 ||b - A x||^2."""
    A = np.asarray(A, dtype=float)
    b = _as_vector(b, "b")
    if A.ndim != 2 or A.shape[0] != b.shape[0]:
        raise ValueError(f"A {A.shape} does not match b {b.shape}")

    def value(x):
        r = b - A @ x
        return 0.5 * float(r @ r)

    def gradient(x):
        return A.T @ (A @ x - b)

    def hessian_vec(x, v):
        return A.T @ (A @ v)

    x_star, *_ = np.linalg.lstsq(A, b, rcond=None)
    return ObjectiveSpec(
        value=value,
        gradient=gradient,
        hessian_vec=hessian_vec,
        lipschitz=estimate_lipschitz(A),
        known_minimum=value(x_star),
        known_minimizer=x_star,
        dim=A.shape[1],
    )


def abs_objective(weight: float = 1.0) -> ObjectiveSpec:
    """1-d f(x) = weight*|x|: nonsmooth, with exact prox (soft threshold)."""
    if weight <= 0:
        raise ValueError("weight must be positive")

    def value(x):
        return weight * float(np.sum(np.abs(x)))

    def prox(x, lam):
        from .prox import prox_l1

        return prox_l1(x, lam * weight)

    return ObjectiveSpec(
        value=value,
        prox=prox,
        known_minimum=0.0,
        known_minimizer=np.zeros(1),
        dim=1,
    )


def finite_diff_gradient_check(obj: ObjectiveSpec, x: np.ndarray, step: float = 1e-6) -> float:
    """Max coordinate-wise relative error between analytic and central-difference gradient.

    Relative error per coordinate uses max(1, |fd_i|) in the denominator so the
    check stays meaningful near stationary points.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if obj.gradient is None:
        raise ValueError("objective has no gradient to check")
    x = _as_vector(x)
    g = np.asarray(obj.gradient(x), dtype=float)
    fd = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = step
        fd[i] = (obj.value(x + e) - obj.value(x - e)) / (2.0 * step)
    if not np.all(np.isfinite(fd)) or not np.all(np.isfinite(g)):
        raise NumericError("non-finite values in gradient check")
    return float(np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(fd))))


def estimate_lipschitz(A: np.ndarray, rel_tol: float = 1e-8, max_iter: int = 1000) -> float:
    """Largest eigenvalue of A^T A by power iteration.

    Deterministic start vector; stops when the Rayleigh quotient is stable to
    rel_tol or after max_iter rounds.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    n = A.shape[1]
    v = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v_new = w / norm
        lam_new = float(v_new @ (A.T @ (A @ v_new)))
        if abs(lam_new - lam) <= rel_tol * max(1.0, abs(lam_new)):
            return lam_new
        lam, v = lam_new, v_new
    return lam


@dataclass(frozen=True)
class RLSInstance:
    """Regularized least-squares data: min 0.5||b - Ax||^2 + weight * g(x).

    regularizer is one of "l1", "nuclear", "none". For "nuclear" the variable is
    the row-major vectorization of a matrix_shape matrix. lambda_metric is the
    lambda used to build the metric M = lambda^{-1} I - A^T A and must satisfy
    0 < lambda * ||A||^2 < 1.
    """

    A: np.ndarray
    b: np.ndarray
    regularizer: str
    weight: float
    lambda_metric: float
    ground_truth: Optional[np.ndarray] = None
    seed: Optional[int] = None
    matrix_shape: Optional[tuple] = None
    gram_norm: float = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0]:
            raise ValueError(f"A {A.shape} does not match b {b.shape}")
        if self.regularizer not in ("l1", "nuclear", "none"):
            raise ValueError(f"unknown regularizer {self.regularizer!r}")
        if self.regularizer != "none" and self.weight <= 0:
            raise ValueError("weight must be positive")
        if self.regularizer == "nuclear":
            if self.matrix_shape is None:
                raise ValueError("nuclear regularizer needs matrix_shape")
            p, q = self.matrix_shape
            if p * q != A.shape[1]:
                raise ValueError("matrix_shape does not match the variable size")
        gram = estimate_lipschitz(A)
        object.__setattr__(self, "gram_norm", gram)
        if not (0.0 < self.lambda_metric * gram < 1.0):
            raise ValueError(
                "lambda_metric must satisfy 0 < lambda*||A||^2 < 1, got "
                f"lambda*||A||^2 = {self.lambda_metric * gram:.6g}"
            )

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def regularizer_value(inst: RLSInstance, x: np.ndarray) -> float:
    """weight * g(x) for the instance's regularizer."""
    x = np.asarray(x, dtype=float)
    if inst.regularizer == "l1":
        return inst.weight * float(np.sum(np.abs(x)))
    if inst.regularizer == "nuclear":
        X = x.reshape(inst.matrix_shape)
        return inst.weight * float(np.sum(np.linalg.svd(X, compute_uv=False)))
    return 0.0


def composite_value(inst: RLSInstance, x: np.ndarray) -> float:
    """0.5||b - Ax||^2 + weight * g(x)."""
    x = np.asarray(x, dtype=float)
    r = inst.b - inst.A @ x
    val = 0.5 * float(r @ r) + regularizer_value(inst, x)
    if not np.isfinite(val):
        raise NumericError("composite objective is non-finite")
    return val


def gen_lasso_instance(
    m: int = 50,
    n: int = 200,
    sparsity: int = 10,
    noise: float = 0.0,
    seed: int = 0,
) -> RLSInstance:
    """Random sparse-recovery instance.

    A has N(0, 1/m) entries; ground truth has `sparsity` standard-normal
    entries on a random support; b = A x_true + noise * N(0, I). The l1 weight
    is 0.1 * ||A^T b||_inf and lambda_metric is 0.9 / ||A||^2.
    """
    if not (0 < sparsity <= n):
        raise ValueError("sparsity must be in 1..n")
    if m <= 0 or n <= 0:
        raise ValueError("m and n must be positive")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n)) / np.sqrt(m)
    x_true = np.zeros(n)
    support = rng.choice(n, size=sparsity, replace=False)
    x_true[support] = rng.standard_normal(sparsity)
    b = A @ x_true
    if noise > 0:
        b = b + noise * rng.standard_normal(m)
    weight = 0.1 * float(np.max(np.abs(A.T @ b)))
    lam = 0.9 / estimate_lipschitz(A)
    return RLSInstance(
        A=A, b=b, regularizer="l1", weight=weight, lambda_metric=lam,
        ground_truth=x_true, seed=seed,
    )


def gen_lowrank_instance(
    p: int = 10,
    q: int = 10,
    rank: int = 2,
    m: int = 60,
    noise: float = 0.0,
    seed: int = 0,
) -> RLSInstance:
    """Random low-rank recovery instance on vectorized p x q matrices."""
    if not (1 <= rank <= min(p, q)):
        raise ValueError("rank must be in 1..min(p,q)")
    if m > p * q:
        raise ValueError("m must not exceed p*q")
    rng = np.random.default_rng(seed)
    G1 = rng.standard_normal((p, rank))
    G2 = rng.standard_normal((q, rank))
    X_true = (G1 @ G2.T) / np.sqrt(rank)
    x_true = X_true.reshape(-1)
    A = rng.standard_normal((m, p * q)) / np.sqrt(m)
    b = A @ x_true
    if noise > 0:
        b = b + noise * rng.standard_normal(m)
    weight = 0.1 * float(np.max(np.abs(A.T @ b)))
    lam = 0.9 / estimate_lipschitz(A)
    return RLSInstance(
        A=A, b=b, regularizer="nuclear", weight=weight, lambda_metric=lam,
        ground_truth=x_true, seed=seed, matrix_shape=(p, q),
    )


def instance_to_json(inst: RLSInstance) -> str:
    """Serialize an instance to a JSON string (A row-major)."""
    payload = {
        "m": inst.m,
        "n": inst.n,
        "seed": inst.seed,
        "regularizer": inst.regularizer,
        "weight": inst.weight,
        "lambda_metric": inst.lambda_metric,
        "A": inst.A.reshape(-1).tolist(),
        "b": inst.b.tolist(),
        "ground_truth": None if inst.ground_truth is None else inst.ground_truth.tolist(),
    }
    if inst.matrix_shape is not None:
        payload["matrix_shape"] = list(inst.matrix_shape)
    return json.dumps(payload)


def instance_from_json(text: str) -> RLSInstance:
    """Inverse of instance_to_json."""
    d = json.loads(text)
    m, n = int(d["m"]), int(d["n"])
    A = np.asarray(d["A"], dtype=float).reshape(m, n)
    gt = d.get("ground_truth")
    shape = d.get("matrix_shape")
    return RLSInstance(
        A=A,
        b=np.asarray(d["b"], dtype=float),
        regularizer=d["regularizer"],
        weight=float(d["weight"]),
        lambda_metric=float(d["lambda_metric"]),
        ground_truth=None if gt is None else np.asarray(gt, dtype=float),
        seed=d.get("seed"),
        matrix_shape=None if shape is None else tuple(shape),
    )
