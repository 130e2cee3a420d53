#!/usr/bin/env python3
"""Step-size ladder: how fast the proximal iteration tracks the dynamic.

Integrates the continuous dynamic on a 1-D quadratic to high accuracy, seeds
the discrete iteration with trajectory values at t = 2, and measures the
mismatch at t = 6 for a halving sequence of step sizes. First-order tracking
shows up as an error ratio near 2 per halving.

Usage: python scripts/discretization_ladder.py [--steps 0.1 0.05 0.025]
"""

import argparse

import numpy as np

import inertia_hd as ih

T_SEED, T_PROBE = 2.0, 6.0


def reference_state(obj, cs, t_end, tol=1e-11):
    pts = ih.integrate_trajectory(obj, cs, np.array([1.0]), np.array([0.0]), t_end=t_end, tol=tol)
    return pts[-1].x


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=float, nargs="+", default=[0.1, 0.05, 0.025])
    ap.add_argument("--alpha", type=float, default=4.0)
    ap.add_argument("--beta", type=float, default=1.0)
    args = ap.parse_args()

    obj = ih.quadratic_objective(np.array([[1.0]]))
    cs = ih.constant_beta_schedule(alpha=args.alpha, beta=args.beta, t0=1.0)
    x_seed = reference_state(obj, cs, T_SEED)
    x_probe = reference_state(obj, cs, T_PROBE)

    print(f"x({T_SEED}) = {x_seed[0]:.10f}   x({T_PROBE}) = {x_probe[0]:.10f}")
    errors = []
    for h in args.steps:
        k0 = round(T_SEED / h)
        sched = ih.constant_schedule(alpha=args.alpha, h=h, beta=args.beta, b=1.0)
        x_before = reference_state(obj, cs, T_SEED - h)
        n_steps = round((T_PROBE - T_SEED) / h) + 1
        trace = ih.run_solver(
            "ipahd", obj, sched, n_steps,
            x0=x_before, x1=x_seed, k_start=k0,
            record_iterates=True, record_lyapunov=False,
        )
        k_target = round(T_PROBE / h)
        i = int(np.where(trace.k == k_target)[0][0])
        err = float(np.linalg.norm(trace.iterates[i] - x_probe))
        errors.append(err)
        print(f"h = {h:<7g} iterate k = {k_target:<5d} error = {err:.6e}")

    for a, b, ha, hb in zip(errors, errors[1:], args.steps, args.steps[1:]):
        print(f"ratio e({ha:g})/e({hb:g}) = {a / b:.3f}")


if __name__ == "__main__":
    main()
