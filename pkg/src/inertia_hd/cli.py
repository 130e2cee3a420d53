"""The inertia-hd command: run | check | ode | sweep over TOML configs.

Exit codes: 0 success, 1 bad config, 2 numeric failure, 3 condition-check
failure. No output files are written until the whole config has validated.
"""

import argparse
import itertools
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .algorithms import (
    DiscreteSchedule,
    constant_schedule,
    reference_solution,
    run_solver,
    validate_discrete_conditions,
)
from .config import (
    CheckConfig,
    ConfigError,
    ExperimentConfig,
    MethodConfig,
    build_continuous_schedule,
    build_method_params,
    build_problem,
    load_config,
)
from .diagnostics import count_oscillations, fit_envelope_slope, fit_rate_slope, trajectory_trace
from .dynamics import check_continuous_conditions, integrate_trajectory
from .errors import NumericError
from .problems import instance_to_json
from .prox import MetricRLS
from .svgplot import loglog_panel

__all__ = ["main", "cmd_run", "cmd_check", "cmd_ode", "cmd_sweep"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_CONDITIONS = 3


def _write(path: Path, text: str):
    path.write_text(text)
    return path.name


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _reference(problem, cfg: ExperimentConfig):
    if isinstance(problem, MetricRLS):
        budget = max(cfg.presolve_factor * cfg.max_iter, cfg.max_iter)
        return reference_solution(problem, budget)
    if problem.known_minimum is not None:
        return problem.known_minimizer, problem.known_minimum
    return reference_solution(problem, cfg.presolve_factor * cfg.max_iter)


def _fit_window(cfg: ExperimentConfig, trace) -> tuple:
    if trace.k.size == 0:
        return (1, 2)
    k_first, k_last = int(trace.k[0]), int(trace.k[-1])
    lo = cfg.fit_lo if cfg.fit_lo is not None else max(k_first + 3, min(100, max(10, k_last // 10)))
    hi = cfg.fit_hi if cfg.fit_hi is not None else k_last
    return int(lo), int(hi)


def _trace_report(cfg, mc: MethodConfig, params, trace, wall: float, files):
    try:
        lo, hi = _fit_window(cfg, trace)
        fit = fit_rate_slope(trace, "f_gap", (lo, hi)).to_dict()
    except ValueError:
        fit = None
    if isinstance(params, DiscreteSchedule):
        lam = mc.lam if mc.lam is not None else params.alpha - 1.0
        k_max = max(int(trace.k[-1]) if trace.k.size else 2, 2)
        cond = validate_discrete_conditions(params, lam, k_max).to_dict()
        pdict = {"alpha": params.alpha, "h": params.h, "beta": mc.beta, "b": mc.b}
        if mc.name == "ipahd_ns":
            pdict["theta"] = mc.theta
    else:
        cond = {
            "constraints": {
                "alpha >= 3": bool(params.alpha >= 3),
                "beta < 2*sqrt(s)": bool(params.beta < 2 * np.sqrt(params.s)),
                "s*L <= 1": True,  # enforced during validation
            }
        }
        pdict = {"alpha": params.alpha, "beta": params.beta, "s": params.s}
    return {
        "name": mc.label(),
        "method": mc.name,
        "params": pdict,
        "rate_fits": {"f_gap": fit},
        "oscillations": count_oscillations(trace, "f_gap"),
        "condition_report": cond,
        "files": files,
        "wall_time_s": round(wall, 3),
    }


def _run_one(mc: MethodConfig, problem, params, cfg, reference, x0):
    t0 = time.perf_counter()
    trace = run_solver(
        mc.name,
        problem,
        params,
        cfg.max_iter,
        x0=x0,
        reference=reference,
        lyapunov_lambda=mc.lam,
        theta=mc.theta,
        lagged_correction=mc.lagged,
    )
    return trace, time.perf_counter() - t0


def cmd_run(cfg: ExperimentConfig, out_dir: Path) -> int:
    if cfg.problem is None:
        raise ConfigError("run needs a [problem] table")
    if not cfg.methods:
        raise ConfigError("run needs at least one [[method]] block")
    problem, inst = build_problem(cfg.problem, cfg.seed_override)
    if isinstance(problem, MetricRLS):
        for mc in cfg.methods:
            if mc.name in ("ipahd", "ipahd_ns"):
                raise ConfigError(
                    f"method {mc.name} runs on smooth objectives; "
                    "use igahd_rls or fista for regularized least squares"
                )
    params_list = [build_method_params(mc, problem) for mc in cfg.methods]
    x0 = None if cfg.problem.start is None else np.asarray(cfg.problem.start, dtype=float)

    reference = _reference(problem, cfg)

    out_dir.mkdir(parents=True, exist_ok=True)
    methods_out = []
    curves_gap, curves_dist = [], []
    for i, (mc, params) in enumerate(zip(cfg.methods, params_list)):
        trace, wall = _run_one(mc, problem, params, cfg, reference, x0)
        csv_name = f"{i:02d}_{mc.label()}.csv"
        trace.to_csv(out_dir / csv_name)
        methods_out.append(_trace_report(cfg, mc, params, trace, wall, [csv_name]))
        curves_gap.append((mc.label(), trace.k, trace.f_gap))
        if trace.dist is not None:
            curves_dist.append((mc.label(), trace.k, trace.dist))
        print(f"{mc.label()}: {trace.k.size} rows -> {csv_name}")

    extra_files = [
        _write(out_dir / "fgap.svg", loglog_panel(curves_gap, cfg.title or "objective gap", "k", "f - f*"))
    ]
    if curves_dist:
        extra_files.append(
            _write(
                out_dir / "distance.svg",
                loglog_panel(curves_dist, cfg.title or "distance to solution", "k", "||x_k - x*||"),
            )
        )
    if inst is not None and cfg.problem.save_instance:
        extra_files.append(_write(out_dir / "instance.json", instance_to_json(inst)))

    report = {
        "config_digest": cfg.digest,
        "title": cfg.title,
        "methods": methods_out,
        "files": extra_files,
    }
    _write(out_dir / "report.json", _json_dump(report))
    print(f"report -> {out_dir / 'report.json'}")
    return EXIT_OK


def cmd_check(cfg: ExperimentConfig, out_dir: Path) -> int:
    if cfg.check is None:
        raise ConfigError("check needs a [check] table")
    cc: CheckConfig = cfg.check
    if cc.kind == "continuous":
        cs = build_continuous_schedule(cc)
        lo = cc.grid_lo if cc.grid_lo is not None else cs.t0
        hi = cc.grid_hi if cc.grid_hi is not None else 100.0 * cs.t0
        if not (cs.t0 <= lo < hi):
            raise ConfigError(f"bad grid [{lo}, {hi}] for t0 = {cs.t0}")
        grid = np.geomspace(lo, hi, cc.grid_points)
        report = check_continuous_conditions(cs, epsilon=cc.epsilon, grid=grid)
    else:
        sched = constant_schedule(alpha=cc.alpha, h=cc.h, beta=cc.beta, b=cc.b)
        lam = cc.lam if cc.lam is not None else cc.alpha - 1.0
        report = validate_discrete_conditions(
            sched, lam, cc.k_max, epsilon=cc.epsilon, B_lower=cc.B_lower
        )
    print(report.describe())
    failure = report.first_failure()
    if failure is not None:
        where = failure.first_violation
        loc = "end of grid" if where is None else f"{where:g}"
        print(f"FAIL: {failure.name} first violated at {loc}")
        return EXIT_CONDITIONS
    print("all conditions hold on the grid")
    return EXIT_OK


def cmd_ode(cfg: ExperimentConfig, out_dir: Path) -> int:
    if cfg.ode is None:
        raise ConfigError("ode needs an [ode] table")
    if cfg.problem is None or cfg.problem.kind != "quadratic":
        raise ConfigError("ode needs a [problem] table with kind = 'quadratic'")
    obj, _ = build_problem(cfg.problem, cfg.seed_override)
    oc = cfg.ode
    cs = build_continuous_schedule(oc)
    n = obj.dim
    x0 = np.asarray(oc.x0, dtype=float) if oc.x0 is not None else (
        np.asarray(cfg.problem.start, dtype=float) if cfg.problem.start is not None else np.ones(n)
    )
    v0 = np.asarray(oc.v0, dtype=float) if oc.v0 is not None else np.zeros(n)
    if oc.t_end <= cs.t0:
        raise ConfigError(f"ode.t_end must exceed t0 = {cs.t0}")

    t_start = time.perf_counter()
    points = integrate_trajectory(obj, cs, x0, v0, t_end=oc.t_end, tol=oc.tol)
    wall = time.perf_counter() - t_start
    trace = trajectory_trace(
        obj, cs, points, reference=(obj.known_minimizer, obj.known_minimum)
    )

    try:
        lo = max(cs.t0, oc.t_end / 30.0)
        fit = fit_envelope_slope(trace.t, trace.f_gap, lo, oc.t_end).to_dict()
    except ValueError:
        fit = None

    out_dir.mkdir(parents=True, exist_ok=True)
    trace.to_csv(out_dir / "trajectory.csv")
    files = ["trajectory.csv"]
    files.append(
        _write(
            out_dir / "fgap_t.svg",
            loglog_panel([("trajectory", trace.t, trace.f_gap)], cfg.title or "continuous gap", "t", "f - f*"),
        )
    )
    report = {
        "config_digest": cfg.digest,
        "title": cfg.title,
        "methods": [
            {
                "name": "ode",
                "params": {
                    "schedule": oc.schedule,
                    "alpha": oc.alpha,
                    "t0": cs.t0,
                    "t_end": oc.t_end,
                    "tol": oc.tol,
                },
                "rate_fits": {"f_gap": fit},
                "files": files,
                "wall_time_s": round(wall, 3),
            }
        ],
        "files": [],
    }
    _write(out_dir / "report.json", _json_dump(report))
    slope = "n/a" if fit is None else f"{fit['slope']:.3f}"
    print(f"ode: {len(points)} samples, f_gap slope {slope} -> {out_dir / 'report.json'}")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out_dir: Path) -> int:
    if cfg.sweep is None:
        raise ConfigError("sweep needs a [sweep] table")
    if cfg.problem is None:
        raise ConfigError("sweep needs a [problem] table")
    problem, inst = build_problem(cfg.problem, cfg.seed_override)
    cells = [
        MethodConfig(name=cfg.sweep.method, alpha=float(a), beta=float(b), s=cfg.sweep.s)
        for a, b in itertools.product(cfg.sweep.alpha, cfg.sweep.beta)
    ]
    params_list = [build_method_params(mc, problem) for mc in cells]
    x0 = None if cfg.problem.start is None else np.asarray(cfg.problem.start, dtype=float)

    reference = _reference(problem, cfg)

    out_dir.mkdir(parents=True, exist_ok=True)
    methods_out = []
    for i, (mc, params) in enumerate(zip(cells, params_list)):
        trace, wall = _run_one(mc, problem, params, cfg, reference, x0)
        csv_name = f"{i:02d}_{mc.label()}.csv"
        trace.to_csv(out_dir / csv_name)
        methods_out.append(_trace_report(cfg, mc, params, trace, wall, [csv_name]))
        print(f"{mc.label()}: {trace.k.size} rows -> {csv_name}")

    report = {
        "config_digest": cfg.digest,
        "title": cfg.title,
        "methods": methods_out,
        "files": [],
    }
    _write(out_dir / "report.json", _json_dump(report))
    print(f"report -> {out_dir / 'report.json'} ({len(methods_out)} cells)")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "check": cmd_check, "ode": cmd_ode, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="inertia-hd",
        description="Benchmark inertial first-order methods with Hessian-driven damping.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "run": "run the configured solvers and write traces, plots, and a report",
        "check": "evaluate parameter conditions for a schedule",
        "ode": "integrate the continuous dynamic and fit its rate",
        "sweep": "run a cross-product of damping parameters",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config", help="path to a TOML experiment config")
        sp.add_argument("--out", default=None, help="output directory (default <config>_out)")
        sp.add_argument("--seed", type=int, default=None, help="override the problem seed")
        sp.add_argument("--max-iter", type=int, default=None, help="override run.max_iter")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed_override=args.seed)
        if args.max_iter is not None:
            if args.max_iter < 0:
                raise ConfigError("--max-iter must be >= 0")
            cfg = replace(cfg, max_iter=args.max_iter)
        out_dir = Path(args.out) if args.out else Path(args.config).parent / (
            Path(args.config).stem + "_out"
        )
        return COMMANDS[args.command](cfg, out_dir)
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
