"""Experiment configuration: TOML documents parsed into dataclass configs.

A config file holds one `[problem]` table, a `[run]` table, and either
`[[method]]` blocks (for `run`), an `[ode]` table, a `[check]` table, or a
`[sweep]` table. Every block is validated before any work starts so that a
bad config never leaves partial outputs behind.
"""

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import tomli

from .algorithms import METHODS, DiscreteSchedule, IGAHDParams, constant_schedule
from .dynamics import (
    ContinuousSchedule,
    constant_beta_schedule,
    corrected_b_schedule,
    power_b_schedule,
    power_pair_schedule,
)
from .problems import gen_lasso_instance, gen_lowrank_instance, quadratic_objective
from .prox import MetricRLS

__all__ = [
    "ConfigError",
    "ProblemConfig",
    "MethodConfig",
    "OdeConfig",
    "CheckConfig",
    "SweepConfig",
    "ExperimentConfig",
    "load_config",
    "config_digest",
    "build_problem",
    "build_method_params",
    "build_continuous_schedule",
]

PROBLEM_KINDS = ("lasso", "lowrank", "quadratic")
CONTINUOUS_SCHEDULES = ("constant_beta", "corrected_b", "power_b", "power_pair")


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


@dataclass(frozen=True)
class ProblemConfig:
    kind: str
    m: int = 50
    n: int = 200
    sparsity: int = 10
    noise: float = 0.0
    seed: int = 0
    p: int = 10
    q: int = 10
    rank: int = 2
    weight: Optional[float] = None
    lambda_metric: Optional[float] = None
    diag: Optional[tuple] = None
    matrix: Optional[tuple] = None  # row tuples for a full quadratic form
    linear: Optional[tuple] = None
    start: Optional[tuple] = None  # warm-start point for solver runs
    save_instance: bool = False  # also write the generated instance as JSON


@dataclass(frozen=True)
class MethodConfig:
    name: str
    alpha: float = 4.0
    beta: float = 0.0
    s: Optional[float] = None  # gradient family; None means 1/L
    h: float = 1.0  # proximal family
    b: float = 1.0
    theta: float = 1.0
    lam: Optional[float] = None  # lyapunov lambda override
    lagged: bool = False

    def label(self) -> str:
        bits = [self.name, f"a{self.alpha:g}"]
        if self.name in ("igahd", "igahd_rls"):
            bits.append(f"b{self.beta:g}")
        return "_".join(bits)


@dataclass(frozen=True)
class OdeConfig:
    schedule: str = "constant_beta"
    alpha: float = 4.0
    beta: float = 1.0
    r: float = 1.0
    c: float = 1.0
    b_exp: float = 0.0
    beta_exp: float = 0.0
    t0: float = 1.0
    t_end: float = 100.0
    tol: float = 1e-8
    x0: Optional[tuple] = None
    v0: Optional[tuple] = None


@dataclass(frozen=True)
class CheckConfig:
    kind: str  # continuous | discrete
    alpha: float = 4.0
    # continuous side
    schedule: str = "constant_beta"
    beta: float = 0.0
    r: float = 1.0
    c: float = 1.0
    b_exp: float = 0.0
    beta_exp: float = 0.0
    t0: float = 1.0
    grid_lo: Optional[float] = None
    grid_hi: Optional[float] = None
    grid_points: int = 200
    # discrete side
    h: float = 1.0
    b: float = 1.0
    lam: Optional[float] = None
    k_max: int = 1000
    epsilon: Optional[float] = None
    B_lower: Optional[float] = None


@dataclass(frozen=True)
class SweepConfig:
    method: str
    alpha: tuple
    beta: tuple
    s: Optional[float] = None


@dataclass(frozen=True)
class ExperimentConfig:
    problem: Optional[ProblemConfig]
    methods: tuple = ()
    ode: Optional[OdeConfig] = None
    check: Optional[CheckConfig] = None
    sweep: Optional[SweepConfig] = None
    max_iter: int = 1000
    seed_override: Optional[int] = None
    title: str = ""
    digest: str = ""
    presolve_factor: int = 10
    fit_lo: Optional[int] = None
    fit_hi: Optional[int] = None


def config_digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def _take(table: dict, klass, where: str, **extra):
    """Build a dataclass from a TOML table, rejecting unknown keys."""
    known = set(klass.__dataclass_fields__)
    bad = set(table) - known
    if bad:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(bad))}")
    clean = dict(table)
    for key, val in clean.items():
        if isinstance(val, list):
            clean[key] = tuple(tuple(v) if isinstance(v, list) else v for v in val)
    clean.update(extra)
    try:
        return klass(**clean)
    except TypeError as e:
        raise ConfigError(f"bad [{where}] table: {e}") from e


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment config."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        doc = tomli.loads(raw.decode("utf-8"))
    except (tomli.TOMLDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from e

    problem = None
    if "problem" in doc:
        problem = _take(doc["problem"], ProblemConfig, "problem")
        if problem.kind not in PROBLEM_KINDS:
            raise ConfigError(
                f"problem.kind must be one of {PROBLEM_KINDS}, got {problem.kind!r}"
            )

    run = doc.get("run", {})
    known_run = {"max_iter", "presolve_factor", "fit_lo", "fit_hi"}
    bad = set(run) - known_run
    if bad:
        raise ConfigError(f"unknown key(s) in [run]: {', '.join(sorted(bad))}")
    max_iter = int(run.get("max_iter", 1000))
    if max_iter < 0:
        raise ConfigError("run.max_iter must be >= 0")

    methods = tuple(
        _take(m, MethodConfig, "method") for m in doc.get("method", [])
    )
    for mc in methods:
        if mc.name not in METHODS:
            raise ConfigError(f"unknown method {mc.name!r}; expected one of {METHODS}")

    ode = _take(doc["ode"], OdeConfig, "ode") if "ode" in doc else None
    if ode is not None and ode.schedule not in CONTINUOUS_SCHEDULES:
        raise ConfigError(
            f"ode.schedule must be one of {CONTINUOUS_SCHEDULES}, got {ode.schedule!r}"
        )

    check = _take(doc["check"], CheckConfig, "check") if "check" in doc else None
    if check is not None and check.kind not in ("continuous", "discrete"):
        raise ConfigError("check.kind must be 'continuous' or 'discrete'")

    sweep = None
    if "sweep" in doc:
        sweep = _take(doc["sweep"], SweepConfig, "sweep")
        if sweep.method not in METHODS:
            raise ConfigError(f"unknown sweep method {sweep.method!r}")
        if not sweep.alpha or not sweep.beta:
            raise ConfigError("sweep.alpha and sweep.beta must be non-empty lists")

    return ExperimentConfig(
        problem=problem,
        methods=methods,
        ode=ode,
        check=check,
        sweep=sweep,
        max_iter=max_iter,
        title=str(doc.get("title", "")),
        digest=config_digest(raw),
        presolve_factor=int(run.get("presolve_factor", 10)),
        fit_lo=run.get("fit_lo"),
        fit_hi=run.get("fit_hi"),
    )


def build_problem(pc: ProblemConfig, seed_override: Optional[int] = None):
    """Instantiate the configured problem.

    Returns (problem, instance) where problem is a MetricRLS for the
    regularized kinds and an ObjectiveSpec for quadratics (instance is None
    then).
    """
    seed = pc.seed if seed_override is None else seed_override
    if pc.kind == "quadratic":
        if pc.diag is not None:
            Q = np.diag(np.asarray(pc.diag, dtype=float))
        elif pc.matrix is not None:
            Q = np.asarray(pc.matrix, dtype=float)
        else:
            raise ConfigError("quadratic problem needs 'diag' or 'matrix'")
        c = None if pc.linear is None else np.asarray(pc.linear, dtype=float)
        return quadratic_objective(Q, c), None
    if pc.kind == "lasso":
        inst = gen_lasso_instance(pc.m, pc.n, pc.sparsity, pc.noise, seed)
    else:
        inst = gen_lowrank_instance(pc.p, pc.q, pc.rank, pc.m, pc.noise, seed)
    if pc.weight is not None or pc.lambda_metric is not None:
        inst = replace(
            inst,
            weight=pc.weight if pc.weight is not None else inst.weight,
            lambda_metric=(
                pc.lambda_metric if pc.lambda_metric is not None else inst.lambda_metric
            ),
        )
    return MetricRLS(inst), inst


def build_method_params(mc: MethodConfig, problem):
    """Turn a method block into solver parameters, enforcing the step rules."""
    if mc.name in ("ipahd", "ipahd_ns"):
        if mc.alpha <= 1:
            raise ConfigError(f"{mc.name} needs alpha > 1, got {mc.alpha}")
        return constant_schedule(alpha=mc.alpha, h=mc.h, beta=mc.beta, b=mc.b)
    if isinstance(problem, MetricRLS):
        s = 1.0 if mc.s is None else float(mc.s)
        if s > 1.0:
            raise ConfigError(
                f"method {mc.name}: step violates s*L <= 1 (metric L = 1, s = {s})"
            )
    else:
        if mc.s is not None:
            s = float(mc.s)
        elif problem.lipschitz:
            s = 1.0 / problem.lipschitz
        else:
            raise ConfigError(f"method {mc.name}: no step s and no Lipschitz constant")
        if problem.lipschitz is not None and s * problem.lipschitz > 1.0 + 1e-12:
            raise ConfigError(
                f"method {mc.name}: step violates s*L <= 1 "
                f"(s = {s}, L = {problem.lipschitz:.6g})"
            )
    beta = 0.0 if mc.name == "fista" else mc.beta
    if not (0 <= beta < 2 * math.sqrt(s)):
        raise ConfigError(
            f"method {mc.name}: beta must lie in [0, 2*sqrt(s)) = "
            f"[0, {2 * math.sqrt(s):.6g}), got {beta}"
        )
    if mc.alpha < 3:
        raise ConfigError(f"method {mc.name} needs alpha >= 3, got {mc.alpha}")
    return IGAHDParams(alpha=mc.alpha, beta=beta, s=s)


def build_continuous_schedule(cfg) -> ContinuousSchedule:
    """Continuous schedule from an OdeConfig or a continuous CheckConfig."""
    name = cfg.schedule
    if name == "constant_beta":
        return constant_beta_schedule(cfg.alpha, cfg.beta, t0=cfg.t0)
    if name == "corrected_b":
        return corrected_b_schedule(cfg.alpha, cfg.beta, t0=cfg.t0)
    if name == "power_b":
        return power_b_schedule(cfg.alpha, cfg.r, t0=cfg.t0)
    if name == "power_pair":
        return power_pair_schedule(cfg.alpha, cfg.c, cfg.b_exp, cfg.beta_exp, t0=cfg.t0)
    raise ConfigError(f"unknown continuous schedule {name!r}")
