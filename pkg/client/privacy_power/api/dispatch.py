# -*- coding: utf-8 -*-
"""Solver selection for a load model.

Closed forms are used where they exist, Blahut-Arimoto for other discrete
loads and the allocators for independent users. The Shannon lower bound
stands in for continuous densities up to their critical power.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from privacy_power.lib import Unit, UnitLike, get_unit
from privacy_power.settings import ToolkitSettings, get_default_settings

from .allocation import (
    BinaryLeakageCurve,
    ExponentialLeakageCurve,
    LeakageCurve,
    TabulatedLeakageCurve,
    allocate_binary,
    allocate_general,
    slb_allocate,
    waterfill_exponential,
)
from .blahut import JOINT_SOLVER_NAME, SOLVER_NAME, solve_curve
from .closed_forms import (
    BINARY_SOLVER,
    EXPONENTIAL_SOLVER,
    SLB_SOLVER,
    ExponentialPolicy,
    binary_leakage_curve,
    binary_policy,
    critical_power,
    exponential_leakage,
    exponential_leakage_derivative,
    exponential_policy,
    slb_bound,
)
from .exceptions import UnsupportedScenarioError
from .models import (
    BinaryLoadModel,
    DiscreteLoadModel,
    ExponentialLoadModel,
    MultiUserModel,
    PiecewiseLoadModel,
    as_discrete,
    is_discrete,
)
from .results import Allocation, CurvePoint, Policy, PrivacyCurve

log = logging.getLogger(__name__)

BINARY_ALLOCATOR = "allocator-binary"
WATERFILLING = "waterfilling"
GENERAL_ALLOCATOR = "allocator-general"
SLB_WATERFILLING = "slb-waterfilling"

LoadModel = Union[
    BinaryLoadModel,
    DiscreteLoadModel,
    ExponentialLoadModel,
    PiecewiseLoadModel,
    MultiUserModel,
]
UserPolicy = Union[Policy, ExponentialPolicy]


def as_multi_user(model: LoadModel) -> MultiUserModel:
    if isinstance(model, MultiUserModel):
        return model
    return MultiUserModel((model,))


def _single(model: LoadModel):
    """The only user of `model`, None for several or correlated users."""
    model = as_multi_user(model)
    if len(model) == 1 and model.joint_pmf is None:
        return model.users[0]
    return None


def select_curve_solver(model: LoadModel) -> str:
    """Name of the solver `compute_curve` uses for `model`.

    Raises:
        UnsupportedScenarioError: No solver covers the combination.

    """
    user = _single(model)
    if user is not None:
        if isinstance(user, BinaryLoadModel):
            return BINARY_SOLVER
        if isinstance(user, ExponentialLoadModel):
            return EXPONENTIAL_SOLVER
        if isinstance(user, DiscreteLoadModel):
            return SOLVER_NAME
        if isinstance(user, PiecewiseLoadModel):
            return SLB_SOLVER
        raise UnsupportedScenarioError(
            f"No curve solver for {type(user).__name__}."
        )
    model = as_multi_user(model)
    if model.joint_pmf is not None:
        return JOINT_SOLVER_NAME
    if all(isinstance(user, BinaryLoadModel) for user in model.users):
        return BINARY_ALLOCATOR
    if all(isinstance(user, ExponentialLoadModel) for user in model.users):
        return WATERFILLING
    if any(isinstance(user, PiecewiseLoadModel) for user in model.users):
        raise UnsupportedScenarioError(
            "Exact multi-user curves with general continuous densities are "
            "not available; only the lower bound of the allocate task "
            "covers them."
        )
    return GENERAL_ALLOCATOR


def user_curves(
    model: LoadModel, settings: Optional[ToolkitSettings] = None
) -> List[LeakageCurve]:
    """Per-user leakage curves in nats for the generic allocator."""
    settings = settings or get_default_settings()
    curves = []
    for index, user in enumerate(as_multi_user(model).users):
        name = f"user{index}"
        if isinstance(user, BinaryLoadModel):
            curves.append(BinaryLeakageCurve(user, name))
        elif isinstance(user, ExponentialLoadModel):
            curves.append(ExponentialLeakageCurve(user.mean, name))
        elif isinstance(user, DiscreteLoadModel):
            log.debug("Tabulating Blahut-Arimoto curve of %s", name)
            curves.append(
                TabulatedLeakageCurve.from_model(
                    user, name, settings.solver, settings.workers
                )
            )
        else:
            raise UnsupportedScenarioError(
                f"User {index} ({type(user).__name__}) has no exact "
                "leakage curve."
            )
    return curves


def _exponential_curve(
    model: ExponentialLoadModel, grid: Sequence[float], unit: Unit
) -> PrivacyCurve:
    points = tuple(
        CurvePoint(
            power,
            exponential_leakage(model.mean, power, unit),
            unit,
            EXPONENTIAL_SOLVER,
            exponential_leakage_derivative(model.mean, power),
        )
        for power in grid
    )
    return PrivacyCurve(points, EXPONENTIAL_SOLVER)


def _slb_curve(
    model: PiecewiseLoadModel,
    grid: Sequence[float],
    unit: Unit,
    settings: ToolkitSettings,
) -> PrivacyCurve:
    limit = critical_power(model, settings.slb)
    beyond = [power for power in grid if power > limit]
    if beyond:
        raise UnsupportedScenarioError(
            f"The lower bound is exact only up to P0={limit:.6g}; no solver "
            f"covers this density at P={beyond[0]:.6g}."
        )
    points = tuple(
        CurvePoint(power, slb_bound(model, power, unit), unit, SLB_SOLVER)
        for power in grid
    )
    return PrivacyCurve(points, SLB_SOLVER)


def compute_curve(
    model: LoadModel,
    power_grid: Sequence[float],
    unit: UnitLike = Unit.bits,
    settings: Optional[ToolkitSettings] = None,
) -> PrivacyCurve:
    """I(P) on `power_grid` with the solver of `select_curve_solver`.

    Raises:
        UnsupportedScenarioError: Model is outside every solver.

    """
    settings = settings or get_default_settings()
    unit = get_unit(unit)
    grid = [float(power) for power in power_grid]
    solver = select_curve_solver(model)
    log.info("Computing %d curve point(s) with %s", len(grid), solver)
    user = _single(model)

    if solver == BINARY_SOLVER:
        return binary_leakage_curve(user, grid, unit)
    if solver == EXPONENTIAL_SOLVER:
        return _exponential_curve(user, grid, unit)
    if solver == SLB_SOLVER:
        return _slb_curve(user, grid, unit, settings)
    if solver in (SOLVER_NAME, JOINT_SOLVER_NAME):
        source = user if user is not None else as_multi_user(model)
        return solve_curve(
            source,
            grid,
            unit=unit,
            settings=settings.solver,
            workers=settings.workers,
        )

    points = tuple(
        CurvePoint(
            allocation.budget,
            allocation.total_leakage,
            allocation.unit,
            solver,
            _slope_of(allocation),
        )
        for allocation in allocation_series(model, grid, unit, settings)
    )
    return PrivacyCurve(points, solver)


def _slope_of(allocation: Allocation) -> float:
    """Common marginal slope in nats per energy unit."""
    if allocation.method in (WATERFILLING, SLB_WATERFILLING):
        if allocation.level <= 0.0:
            return -math.inf
        if all(allocation.saturated):
            return 0.0
        return -1.0 / allocation.level
    if math.isinf(allocation.level):
        return -math.inf
    return -allocation.level


def allocate(
    model: LoadModel,
    power: float,
    unit: UnitLike = Unit.nats,
    settings: Optional[ToolkitSettings] = None,
    curves: Optional[Sequence[LeakageCurve]] = None,
) -> Allocation:
    """Optimal split of `power` across independent users.

    Binary and exponential populations use their closed-form rules, other
    discrete mixes the generic allocator. Populations of continuous users
    with a general density get the waterfilling lower bound.

    Args:
        curves (Sequence[LeakageCurve], optional): Pre-built curves for
            the generic allocator, reused across a power sweep.

    Raises:
        UnsupportedScenarioError: Correlated users, or continuous densities
            mixed with discrete users.

    """
    settings = settings or get_default_settings()
    model = as_multi_user(model)
    if model.joint_pmf is not None:
        raise UnsupportedScenarioError(
            "Correlated users do not separate into per-user curves; use "
            "the curve task for the joint solver."
        )
    users = model.users
    if all(isinstance(user, BinaryLoadModel) for user in users):
        return allocate_binary(users, power, unit)
    if all(isinstance(user, ExponentialLoadModel) for user in users):
        return waterfill_exponential(
            [user.mean for user in users], power, unit
        )
    if any(isinstance(user, PiecewiseLoadModel) for user in users):
        if any(is_discrete(user) for user in users):
            raise UnsupportedScenarioError(
                "Discrete users mixed with general continuous densities "
                "have no allocation rule."
            )
        log.warning(
            "General continuous densities present, reporting the "
            "waterfilling lower bound"
        )
        return slb_allocate(users, power, unit)
    if curves is None:
        curves = user_curves(model, settings)
    return allocate_general(curves, power, unit, settings.allocator)


def _needs_tabulation(model: MultiUserModel) -> bool:
    users = model.users
    if model.joint_pmf is not None:
        return False
    if any(isinstance(user, PiecewiseLoadModel) for user in users):
        return False
    return not (
        all(isinstance(user, BinaryLoadModel) for user in users)
        or all(isinstance(user, ExponentialLoadModel) for user in users)
    )


def allocation_series(
    model: LoadModel,
    power_grid: Sequence[float],
    unit: UnitLike = Unit.nats,
    settings: Optional[ToolkitSettings] = None,
) -> List[Allocation]:
    """`allocate` for every power of a grid, tabulating curves once."""
    settings = settings or get_default_settings()
    model = as_multi_user(model)
    curves = None
    if _needs_tabulation(model):
        curves = user_curves(model, settings)
    return [
        allocate(model, power, unit, settings, curves)
        for power in power_grid
    ]


def optimal_policies(
    model: LoadModel,
    power: float,
    settings: Optional[ToolkitSettings] = None,
) -> Tuple[Tuple[UserPolicy, ...], Optional[Policy]]:
    """Policies achieving the optimal leakage at total power `power`.

    Returns:
        tuple: Per-user policies and the joint policy of correlated users
            (then the per-user tuple is empty).

    Raises:
        UnsupportedScenarioError: No explicit policy exists, e.g. for
            general continuous densities or exponential users left
            without AES power.

    """
    settings = settings or get_default_settings()
    model = as_multi_user(model)
    if model.joint_pmf is not None:
        curve = solve_curve(
            model, [power], unit=Unit.nats, settings=settings.solver,
            workers=1,
        )
        return (), curve.policies[0]

    allocation = allocate(model, power, Unit.nats, settings)
    policies = []
    for index, (user, share) in enumerate(
        zip(model.users, allocation.per_user)
    ):
        if isinstance(user, BinaryLoadModel):
            policies.append(binary_policy(user, share))
        elif isinstance(user, ExponentialLoadModel):
            if share <= 0.0:
                raise UnsupportedScenarioError(
                    f"User {index} is exponential and receives no AES "
                    "power; its optimal policy is undefined."
                )
            policies.append(exponential_policy(user.mean, min(
                share, user.mean
            )))
        elif isinstance(user, DiscreteLoadModel):
            curve = solve_curve(
                user, [share], unit=Unit.nats, settings=settings.solver,
                workers=1,
            )
            policies.append(curve.policies[0])
        else:
            raise UnsupportedScenarioError(
                f"User {index} ({type(user).__name__}) has no explicit "
                "optimal policy."
            )
    log.debug(
        "Optimal policies at P=%.6g use per-user powers %s",
        power, np.round(allocation.per_user, 9).tolist(),
    )
    return tuple(policies), None


def identity_policies(model: LoadModel) -> Tuple[Policy, ...]:
    """Y = X for every discrete user."""
    policies = []
    for index, user in enumerate(as_multi_user(model).users):
        if not is_discrete(user):
            raise UnsupportedScenarioError(
                f"User {index} is continuous; the identity policy is only "
                "replayed on discrete loads."
            )
        policies.append(Policy.identity(as_discrete(user).alphabet))
    return tuple(policies)
