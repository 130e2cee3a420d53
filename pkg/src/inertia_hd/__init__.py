"""Inertial first-order optimization with Hessian-driven damping.

Solvers (`run_solver` over ipahd / ipahd_ns / igahd / igahd_rls / fista), the
continuous dynamic they discretize (`integrate_trajectory`), parameter
condition checkers (`validate_discrete_conditions`,
`check_continuous_conditions`, `named_case_conditions`), and energy/rate
diagnostics. The `inertia-hd` command drives benchmark experiments from TOML
configs.
"""

from .algorithms import (
    DiscreteSchedule,
    IGAHDParams,
    RunState,
    RunTrace,
    StoppingRule,
    compute_growth,
    constant_schedule,
    igahd_rls_step,
    igahd_step,
    ipahd_ns_step,
    ipahd_step,
    reference_solution,
    run_solver,
    validate_discrete_conditions,
)
from .conditions import ConditionReport, ConditionVerdict
from .diagnostics import (
    LyapunovSpec,
    RateFit,
    TrajectoryTrace,
    count_oscillations,
    decade_max_ratio,
    fit_envelope_slope,
    fit_loglog,
    fit_rate_slope,
    lyapunov_continuous,
    lyapunov_igahd,
    lyapunov_ipahd,
    recursion_forcing_terms,
    reinforced_descent_gap,
    running_max_settled,
    summability_probe,
    trajectory_trace,
)
from .dynamics import (
    CaseVerdict,
    ContinuousSchedule,
    TrajectoryPoint,
    check_continuous_conditions,
    constant_beta_schedule,
    corrected_b_schedule,
    din_avd_acceleration,
    din_avd_first_order_rhs,
    first_order_initial_y,
    integrate_trajectory,
    named_case_conditions,
    power_b_schedule,
    power_pair_schedule,
    w_dot_eval,
    w_eval,
)
from .errors import CapabilityError, NumericError
from .problems import (
    ObjectiveSpec,
    RLSInstance,
    abs_objective,
    composite_value,
    estimate_lipschitz,
    finite_diff_gradient_check,
    gen_lasso_instance,
    gen_lowrank_instance,
    instance_from_json,
    instance_to_json,
    least_squares_objective,
    quadratic_objective,
    quadratic_value_grad,
    regularizer_value,
)
from .prox import (
    MetricRLS,
    envelope_objective,
    grad_metric_rls,
    metric_envelope_value,
    metric_inner,
    metric_norm,
    metric_objective,
    moreau_gradient,
    moreau_value,
    prox_l1,
    prox_metric_rls,
    prox_nuclear,
    prox_of_envelope,
    prox_smooth_quadratic,
    regularizer_prox,
)

__version__ = "0.1.0"
