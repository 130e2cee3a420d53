import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

import inertia_hd as ih

small = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


# ---------------------------------------------------------------------------
# schedules and w


def test_w_eval_known_values():
    flat = ih.ContinuousSchedule(alpha=4.0)  # beta = 0, b = 1
    assert ih.w_eval(flat, 5.0) == 1.0
    cb = ih.constant_beta_schedule(4.0, 1.0)
    assert ih.w_eval(cb, 10.0) == pytest.approx(0.9)
    corr = ih.corrected_b_schedule(4.0, 2.0)
    for t in (1.0, 3.7, 50.0):
        assert ih.w_eval(corr, t) == pytest.approx(1.0, abs=1e-15)
    pw = ih.power_b_schedule(4.0, 1.5)
    assert ih.w_eval(pw, 4.0) == pytest.approx(8.0)
    pair = ih.power_pair_schedule(4.0, 3.0, 0.0, 1.0)
    assert ih.w_eval(pair, 7.0) == pytest.approx(3.0 - 2.0)  # c*t^0 - 2*t^0
    with pytest.raises(ValueError):
        ih.w_eval(cb, 0.5)
    with pytest.raises(ValueError):
        ih.constant_beta_schedule(4.0, -1.0)
    with pytest.raises(ValueError):
        ih.ContinuousSchedule(alpha=-1.0)
    with pytest.raises(ValueError):
        ih.ContinuousSchedule(alpha=4.0, t0=0.0)


def test_w_dot_analytic_vs_finite_difference():
    cb = ih.constant_beta_schedule(4.0, 2.0)
    assert ih.w_dot_eval(cb, 5.0) == pytest.approx(2.0 / 25.0)
    # same schedule without the analytic derivative falls back to differences
    fd = ih.ContinuousSchedule(
        alpha=4.0, beta=lambda t: 2.0, b=lambda t: 1.0, beta_dot=lambda t: 0.0
    )
    assert ih.w_dot_eval(fd, 5.0) == pytest.approx(2.0 / 25.0, rel=1e-6)
    # at the domain edge only the one-sided difference is available
    assert ih.w_dot_eval(fd, fd.t0) == pytest.approx(2.0, rel=1e-3)
    with pytest.raises(ValueError):
        ih.w_dot_eval(cb, 0.1)


# ---------------------------------------------------------------------------
# the dynamic's right-hand sides


def test_acceleration_known_values(quad1):
    cs = ih.constant_beta_schedule(4.0, 1.0)
    a1 = ih.din_avd_acceleration(quad1, cs, 2.0, np.array([1.0]), np.array([0.0]))
    assert a1[0] == pytest.approx(-1.0)
    a2 = ih.din_avd_acceleration(quad1, cs, 2.0, np.array([0.0]), np.array([1.0]))
    assert a2[0] == pytest.approx(-3.0)
    with pytest.raises(ValueError):
        ih.din_avd_acceleration(quad1, cs, 0.5, np.zeros(1), np.zeros(1))


def test_acceleration_hessian_fallback(quad2):
    cs = ih.constant_beta_schedule(4.0, 1.0)
    x, v = np.array([0.3, -0.7]), np.array([1.2, 0.4])
    exact = ih.din_avd_acceleration(quad2, cs, 3.0, x, v)
    grad_only = ih.ObjectiveSpec(value=quad2.value, gradient=quad2.gradient, dim=2)
    fd = ih.din_avd_acceleration(grad_only, cs, 3.0, x, v)
    np.testing.assert_allclose(fd, exact, atol=1e-6)
    with pytest.raises(ih.CapabilityError):
        ih.din_avd_acceleration(grad_only, cs, 3.0, x, v, allow_fd_hessian=False)
    with pytest.raises(ih.CapabilityError):
        value_only = ih.ObjectiveSpec(value=quad2.value)
        ih.din_avd_acceleration(value_only, cs, 3.0, x, v)


def test_first_order_rhs_known_values(quad1):
    dx, dy = ih.din_avd_first_order_rhs(quad1, 4.0, 1.0, 2.0, np.array([1.0]), np.array([0.0]))
    assert dx[0] == pytest.approx(-2.0)
    assert dy[0] == pytest.approx(0.0)
    with pytest.raises(ValueError):
        ih.din_avd_first_order_rhs(quad1, 4.0, 0.0, 2.0, np.zeros(1), np.zeros(1))
    with pytest.raises(ValueError):
        ih.din_avd_first_order_rhs(quad1, 4.0, 1.0, 0.0, np.zeros(1), np.zeros(1))


@given(small, small, st.floats(0.2, 2.0), st.floats(3.0, 5.0))
def test_first_order_initial_y_reproduces_velocity(x0, v0, beta, alpha):
    obj = ih.quadratic_objective(np.eye(1))
    x = np.array([x0])
    v = np.array([v0])
    y0 = ih.first_order_initial_y(obj, alpha, beta, 1.0, x, v)
    dx, _ = ih.din_avd_first_order_rhs(obj, alpha, beta, 1.0, x, y0)
    np.testing.assert_allclose(dx, v, atol=1e-12)


def test_first_order_route_matches_second_order(quad2):
    # two independent formulations of the same trajectory must land together
    alpha, beta, t0, t_end, tol = 4.0, 1.0, 1.0, 20.0, 1e-9
    x0, v0 = np.array([1.0, 1.0]), np.zeros(2)
    y0 = ih.first_order_initial_y(quad2, alpha, beta, t0, x0, v0)

    def rhs(t, z):
        dx, dy = ih.din_avd_first_order_rhs(quad2, alpha, beta, t, z[:2], z[2:])
        return np.concatenate([dx, dy])

    sol = solve_ivp(
        rhs, (t0, t_end), np.concatenate([x0, y0]), method="RK45", rtol=tol, atol=tol * 1e-3
    )
    assert sol.success
    cs = ih.constant_beta_schedule(alpha, beta, t0=t0)
    pts = ih.integrate_trajectory(quad2, cs, x0, v0, t_end, tol=tol)
    assert pts[-1].t == pytest.approx(t_end)
    assert np.linalg.norm(sol.y[:2, -1] - pts[-1].x) <= 1e-10


# ---------------------------------------------------------------------------
# integration


def test_integrate_stays_at_equilibrium(quad2):
    cs = ih.constant_beta_schedule(4.0, 1.0)
    pts = ih.integrate_trajectory(quad2, cs, np.zeros(2), np.zeros(2), 50.0)
    drift = max(np.linalg.norm(p.x) for p in pts)
    assert drift <= 1e-8


def test_integrate_validation(quad2):
    cs = ih.constant_beta_schedule(4.0, 1.0)
    with pytest.raises(ValueError):
        ih.integrate_trajectory(quad2, cs, np.zeros(2), np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        ih.integrate_trajectory(quad2, cs, np.zeros(2), np.zeros(2), 10.0, tol=0.0)
    with pytest.raises(ValueError):
        ih.integrate_trajectory(quad2, cs, np.zeros(2), np.zeros(1), 10.0)


def test_integrate_sample_grid(quad2):
    cs = ih.constant_beta_schedule(4.0, 1.0, t0=2.0)
    pts = ih.integrate_trajectory(quad2, cs, np.ones(2), np.zeros(2), 10.0, n_samples=50)
    ts = np.array([p.t for p in pts])
    assert ts[0] == pytest.approx(2.0)
    assert ts[-1] == pytest.approx(10.0)
    assert np.all(np.diff(ts) > 0)
    assert len(pts) >= 50


def test_halving_tolerance_tightens_endpoint(quad2):
    cs = ih.constant_beta_schedule(4.0, 1.0)
    x0, v0 = np.array([1.0, 1.0]), np.zeros(2)
    ref = ih.integrate_trajectory(quad2, cs, x0, v0, 20.0, tol=1e-11)[-1].x
    errs = [
        np.linalg.norm(ih.integrate_trajectory(quad2, cs, x0, v0, 20.0, tol=tol)[-1].x - ref)
        for tol in (1e-6, 5e-7)
    ]
    assert errs[0] / errs[1] >= 2.0


@pytest.fixture(scope="module")
def damped_quadratic_path():
    obj = ih.quadratic_objective(np.diag([1.0, 10.0]))
    cs = ih.constant_beta_schedule(4.0, 1.0, t0=1.0)
    pts = ih.integrate_trajectory(obj, cs, np.array([1.0, 1.0]), np.zeros(2), 100.0, tol=1e-8)
    return obj, cs, pts


def test_trajectory_gap_decays(damped_quadratic_path):
    obj, cs, pts = damped_quadratic_path
    tt = ih.trajectory_trace(obj, cs, pts)
    assert tt.f_gap[-1] <= 1e-3
    assert ih.decade_max_ratio(tt.t, tt.f_gap) < 0.1


def test_trajectory_energy_bounds_scaled_gap(damped_quadratic_path):
    # with the default weight lam = alpha-1 the energy dominates t^2 w(t) gap,
    # so the decreasing energy caps the scaled gap by its value at t = 2
    obj, cs, pts = damped_quadratic_path
    tt = ih.trajectory_trace(obj, cs, pts)
    late = tt.t >= 2.0
    E2 = tt.lyapunov[late][0]
    w = np.array([ih.w_eval(cs, t) for t in tt.t[late]])
    scaled = tt.t[late] ** 2 * w * tt.f_gap[late]
    assert np.max(scaled) <= E2 * (1.0 + 1e-9)


def test_trajectory_energy_non_increasing(damped_quadratic_path):
    obj, cs, pts = damped_quadratic_path
    tt = ih.trajectory_trace(obj, cs, pts)
    E = tt.lyapunov[tt.t >= 2.0]
    diffs = np.diff(E)
    assert np.all(diffs <= 1e-6 * np.maximum(1.0, E[:-1]))


# ---------------------------------------------------------------------------
# condition checkers


def test_conditions_constant_beta_threshold():
    cs = ih.constant_beta_schedule(3.5, 1.0)
    grid = np.linspace(1.0, 100.0, 199)  # step 0.5, contains t = 3 exactly
    rep = ih.check_continuous_conditions(cs, grid=grid)
    c1 = rep.verdict("C1")
    assert not c1.holds and c1.first_violation == 1.0 and c1.holds_from == 1.5
    c2 = rep.verdict("C2")
    # (alpha-3) w - t w' = 0.5 - 1.5/t crosses zero exactly at t = 3
    assert not c2.holds and c2.holds_from == 3.0
    assert rep.verdict("C4").holds and rep.verdict("C5").holds


def test_conditions_corrected_b_all_hold():
    cs = ih.corrected_b_schedule(4.0, 1.0)
    rep = ih.check_continuous_conditions(cs, epsilon=0.4)
    assert rep.all_hold()
    assert rep.first_failure() is None


def test_conditions_power_weight_alpha_boundary():
    bad = ih.check_continuous_conditions(ih.power_b_schedule(4.0, 2.0))
    c2 = bad.verdict("C2")
    assert not c2.holds and c2.holds_from is None  # fails through the last grid point
    good = ih.check_continuous_conditions(ih.power_b_schedule(5.0, 2.0))
    assert good.verdict("C2").holds and good.verdict("C1").holds


def test_conditions_validation():
    cs = ih.constant_beta_schedule(4.0, 1.0)
    with pytest.raises(ValueError):
        ih.check_continuous_conditions(cs, grid=np.array([2.0, 1.0, 3.0]))
    with pytest.raises(ValueError):
        ih.check_continuous_conditions(cs, grid=np.array([0.5, 1.0, 2.0]))
    with pytest.raises(ValueError):
        ih.check_continuous_conditions(cs, epsilon=0.0)
    with pytest.raises(ValueError):
        ih.check_continuous_conditions(cs, epsilon=3.0)


# ---------------------------------------------------------------------------
# named closed-form regions


def test_named_case_one():
    v = ih.named_case_conditions("one", alpha=3.5, beta=1.0)
    assert v.holds and v.t_threshold == pytest.approx(3.0)
    assert not ih.named_case_conditions("one", alpha=3.0, beta=1.0).holds
    with pytest.raises(ValueError):
        ih.named_case_conditions("one", alpha=4.0, beta=-1.0)


def test_named_case_two():
    assert ih.named_case_conditions("two", alpha=4.0).holds
    assert not ih.named_case_conditions("two", alpha=3.0).holds


def test_named_case_three():
    assert not ih.named_case_conditions("three", alpha=4.0, r=2.0).holds
    assert ih.named_case_conditions("three", alpha=5.0, r=2.0).holds


def test_named_case_four():
    ok = ih.named_case_conditions("four", alpha=4.0, c=3.0, b_exp=0.0, beta_exp=1.0)
    assert ok.holds
    bad = ih.named_case_conditions("four", alpha=4.0, c=1.5, b_exp=0.0, beta_exp=1.0)
    assert not bad.holds
    with pytest.raises(ValueError):
        ih.named_case_conditions("four", alpha=4.0, c=0.0, b_exp=0.0, beta_exp=1.0)
    with pytest.raises(ValueError):
        ih.named_case_conditions("five", alpha=4.0)


def test_named_case_four_agrees_with_grid_checker():
    grid = np.geomspace(50.0, 5000.0, 120)
    for c, want in ((3.0, True), (1.5, False)):
        verdict = ih.named_case_conditions("four", alpha=4.0, c=c, b_exp=0.0, beta_exp=1.0)
        cs = ih.power_pair_schedule(4.0, c, 0.0, 1.0, t0=50.0)
        rep = ih.check_continuous_conditions(cs, grid=grid)
        assert verdict.holds == want
        assert rep.all_hold(names=("C1", "C2")) == want
