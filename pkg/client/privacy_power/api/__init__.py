# -*- coding: utf-8 -*-
"""Privacy-power toolkit API."""

from .models import (
    BinaryLoadModel,
    DiscreteLoadModel,
    ExponentialLoadModel,
    PiecewiseLoadModel,
    PolynomialSegment,
    ExponentialSegment,
    CallableSegment,
    MultiUserModel,
    entropy,
    differential_entropy,
    mean,
)

from .results import (
    Policy,
    CurvePoint,
    PrivacyCurve,
    Allocation,
)

from .blahut import (
    solve_point,
    solve_curve,
    validate_alphabet_restriction,
    exhaustive_point,
)

from .closed_forms import (
    binary_leakage,
    binary_allocate,
    binary_policy,
    exponential_leakage,
    exponential_policy,
    slb_bound,
    slb_check,
    critical_power,
)

from .allocation import (
    LeakageCurve,
    CallableLeakageCurve,
    allocate_general,
    waterfill_exponential,
    slb_allocate,
)

from .heuristics import (
    HeuristicKind,
    HeuristicSpec,
    time_division,
    time_division_bound,
    limit_max_output,
    limit_max_output_clipped,
    limit_max_output_bound,
    heuristic_policy,
)

from .simulation import (
    TraceConfig,
    SimReport,
    estimate_mi_plugin,
    run,
)

from .dispatch import (
    select_curve_solver,
    compute_curve,
    allocate,
    optimal_policies,
)

from .scenario import (
    Scenario,
    load_scenario,
)

from .pipeline import (
    install,
    uninstall,
    publish,
)

__all__ = [
    "BinaryLoadModel",
    "DiscreteLoadModel",
    "ExponentialLoadModel",
    "PiecewiseLoadModel",
    "PolynomialSegment",
    "ExponentialSegment",
    "CallableSegment",
    "MultiUserModel",
    "entropy",
    "differential_entropy",
    "mean",
    "Policy",
    "CurvePoint",
    "PrivacyCurve",
    "Allocation",
    "solve_point",
    "solve_curve",
    "validate_alphabet_restriction",
    "exhaustive_point",
    "binary_leakage",
    "binary_allocate",
    "binary_policy",
    "exponential_leakage",
    "exponential_policy",
    "slb_bound",
    "slb_check",
    "critical_power",
    "LeakageCurve",
    "CallableLeakageCurve",
    "allocate_general",
    "waterfill_exponential",
    "slb_allocate",
    "HeuristicKind",
    "HeuristicSpec",
    "time_division",
    "time_division_bound",
    "limit_max_output",
    "limit_max_output_clipped",
    "limit_max_output_bound",
    "heuristic_policy",
    "TraceConfig",
    "SimReport",
    "estimate_mi_plugin",
    "run",
    "select_curve_solver",
    "compute_curve",
    "allocate",
    "optimal_policies",
    "Scenario",
    "load_scenario",
    "install",
    "uninstall",
    "publish",
]
