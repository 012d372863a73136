# -*- coding: utf-8 -*-
"""Split of the AES budget across independent users.

With independent loads the multi-user leakage separates into a sum of
per-user curves, and the optimal split equalizes their marginal slopes:
every user that is not yet fully private sits at dI_i/dP_i = -μ.
"""
import abc
import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize
from scipy.interpolate import PchipInterpolator

from privacy_power.lib import Unit, UnitLike, bisect_predicate, from_nats
from privacy_power.settings import AllocatorSettings, SolverSettings

from .blahut import solve_curve
from .closed_forms import (
    binary_allocate,
    binary_leakage,
    binary_leakage_derivative,
    binary_power_at_slope,
    exponential_leakage,
    exponential_leakage_derivative,
)
from .exceptions import ModelError, NonConvexCurveError
from .models import (
    BinaryLoadModel,
    ContinuousLoadModel,
    as_discrete,
    differential_entropy,
)
from .results import (
    Allocation,
    is_midpoint_convex,
    is_non_increasing,
    sum_leakage,
)

log = logging.getLogger(__name__)

GENERAL_METHOD = "allocator-general"
WATERFILLING_METHOD = "waterfilling"
SLB_WATERFILLING_METHOD = "slb-waterfilling"


class LeakageCurve(abc.ABC):
    """Convex non-increasing leakage function of one user, in nats."""

    name = "curve"

    @property
    @abc.abstractmethod
    def saturation_power(self) -> float:
        """Smallest power with zero leakage."""

    @abc.abstractmethod
    def leakage(self, power: float) -> float:
        pass

    @abc.abstractmethod
    def derivative(self, power: float) -> float:
        pass

    def power_at_slope(self, slope: float) -> float:
        """Smallest power whose derivative is >= -`slope`."""
        saturation = self.saturation_power
        if saturation <= 0.0:
            return 0.0

        def steeper(power):
            return self.derivative(power) < -slope

        if not steeper(0.0):
            return 0.0
        _, high = bisect_predicate(
            steeper, 0.0, saturation, 1e-13 * max(saturation, 1.0)
        )
        return high

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class CallableLeakageCurve(LeakageCurve):
    """Curve given by leakage and derivative callables (nats)."""

    def __init__(
        self,
        name: str,
        leakage: Callable[[float], float],
        derivative: Callable[[float], float],
        saturation_power: float,
    ):
        self.name = name
        self._leakage = leakage
        self._derivative = derivative
        self._saturation = float(saturation_power)

    @property
    def saturation_power(self) -> float:
        return self._saturation

    def leakage(self, power):
        return float(self._leakage(power))

    def derivative(self, power):
        return float(self._derivative(power))


class BinaryLeakageCurve(LeakageCurve):
    def __init__(self, model: BinaryLoadModel, name: str = "binary"):
        self.model = model
        self.name = name

    @property
    def saturation_power(self):
        return self.model.perfect_privacy_power

    def leakage(self, power):
        return binary_leakage(self.model, power, Unit.nats)

    def derivative(self, power):
        return binary_leakage_derivative(self.model, power)

    def power_at_slope(self, slope):
        return binary_power_at_slope(self.model, slope)


class ExponentialLeakageCurve(LeakageCurve):
    def __init__(self, mean: float, name: str = "exponential"):
        if not mean > 0:
            raise ModelError(f"Exponential mean must be positive: {mean}")
        self.mean = float(mean)
        self.name = name

    @property
    def saturation_power(self):
        return self.mean

    def leakage(self, power):
        return exponential_leakage(self.mean, power, Unit.nats)

    def derivative(self, power):
        return exponential_leakage_derivative(self.mean, power)

    def power_at_slope(self, slope):
        if slope <= 0.0:
            return self.mean
        return min(1.0 / slope, self.mean)


class SlbLeakageCurve(ExponentialLeakageCurve):
    """Shannon lower bound (h(X) - ln(eP))⁺ of a continuous user.

    It is the exponential curve of the mean e^{h(X) - 1}.
    """

    def __init__(self, model: ContinuousLoadModel, name: str = "slb"):
        self.entropy = differential_entropy(model)
        super().__init__(math.exp(self.entropy - 1.0), name)


class TabulatedLeakageCurve(LeakageCurve):
    """Curve interpolated from solved grid points.

    Values between grid points come from a monotone cubic interpolant,
    derivatives from centered differences with step 1e-6 * saturation
    power.
    """

    def __init__(self, powers, leakages, name: str = "tabulated"):
        powers = np.asarray(powers, dtype=float)
        leakages = np.asarray(leakages, dtype=float)
        order = np.argsort(powers)
        powers, leakages = powers[order], leakages[order]
        if powers.size < 2:
            raise ValueError("A tabulated curve needs at least two points.")
        zero = np.flatnonzero(leakages <= 1e-12)
        self._saturation = float(
            powers[zero[0]] if zero.size else powers[-1]
        )
        self.name = name
        self._interpolant = PchipInterpolator(powers, leakages)
        self._step = 1e-6 * max(self._saturation, 1e-300)

    @classmethod
    def from_model(
        cls,
        model,
        name: str = "tabulated",
        settings: Optional[SolverSettings] = None,
        workers: Optional[int] = None,
    ) -> "TabulatedLeakageCurve":
        """Tabulate the Blahut-Arimoto curve of a discrete user."""
        settings = settings or SolverSettings()
        maximum = as_discrete(model).perfect_privacy_power
        if maximum <= 0.0:
            return cls([0.0, 1.0], [0.0, 0.0], name)
        grid = np.linspace(0.0, maximum, settings.tabulation_points)
        curve = solve_curve(
            model, grid, unit=Unit.nats, settings=settings, workers=workers
        )
        return cls(grid, curve.leakages, name)

    @property
    def saturation_power(self):
        return self._saturation

    def leakage(self, power):
        if power >= self._saturation:
            return 0.0
        return max(float(self._interpolant(power)), 0.0)

    def derivative(self, power):
        if power >= self._saturation:
            return 0.0
        step = self._step
        low = max(power - step, 0.0)
        high = min(power + step, self._saturation)
        return (self.leakage(high) - self.leakage(low)) / (high - low)


def check_convex(
    curve: LeakageCurve, check_points: int = 33, tolerance: float = 1e-9
):
    """Sample `curve` on a grid over [0, saturation].

    Raises:
        NonConvexCurveError: Curve increases or bends downward on the
            check grid.

    """
    saturation = curve.saturation_power
    if not saturation > 0.0:
        return
    grid = np.linspace(0.0, saturation, check_points)
    values = np.array([curve.leakage(power) for power in grid])
    if not (
        is_non_increasing(grid, values, tolerance)
        and is_midpoint_convex(grid, values, tolerance)
    ):
        raise NonConvexCurveError(
            f"Leakage curve '{curve.name}' is not convex and non-increasing "
            f"on [0, {saturation:.6g}].",
            curve_name=curve.name,
        )


def _allocation(
    curves, per_user, level, unit, budget, method
) -> Allocation:
    leakages = [
        from_nats(curve.leakage(share), unit)
        for curve, share in zip(curves, per_user)
    ]
    return Allocation(
        per_user=tuple(per_user),
        level=level,
        total_leakage=sum_leakage(leakages),
        unit=unit,
        saturated=tuple(
            share >= curve.saturation_power
            - 1e-12 * max(curve.saturation_power, 1.0)
            for curve, share in zip(curves, per_user)
        ),
        per_user_leakage=tuple(leakages),
        budget=budget,
        method=method,
    )


def allocate_general(
    curves: Sequence[LeakageCurve],
    power: float,
    unit: UnitLike = Unit.nats,
    settings: Optional[AllocatorSettings] = None,
) -> Allocation:
    """Minimize Σ_i I_i(P_i) subject to Σ_i P_i = P.

    Bisects the common slope magnitude μ; users already fully private at
    slope -μ stay at their saturation power. The last bracket is
    interpolated so that the powers add up to the budget exactly, which
    also splits identical curves equally.

    Raises:
        NonConvexCurveError: A curve fails the convexity check.

    """
    if power < 0:
        raise ValueError(f"AES budget must be >= 0, got {power}.")
    settings = settings or AllocatorSettings()
    curves = list(curves)
    for curve in curves:
        check_convex(
            curve, settings.check_points, settings.convexity_tolerance
        )
    saturation = [curve.saturation_power for curve in curves]
    target = min(power, math.fsum(saturation))

    if target >= math.fsum(saturation):
        return _allocation(
            curves, saturation, 0.0, unit, power, GENERAL_METHOD
        )
    if target <= 0.0:
        return _allocation(
            curves, [0.0] * len(curves), math.inf, unit, power,
            GENERAL_METHOD,
        )

    def powers_at(slope):
        return np.array([curve.power_at_slope(slope) for curve in curves])

    low, high = 0.0, 1.0
    low_powers = powers_at(low)
    high_powers = powers_at(high)
    while high_powers.sum() > target:
        low, low_powers = high, high_powers
        high *= 2.0
        high_powers = powers_at(high)
    for _ in range(400):
        if low_powers.sum() - high_powers.sum() <= settings.tolerance:
            break
        middle = 0.5 * (low + high)
        if middle in (low, high):
            break
        middle_powers = powers_at(middle)
        if middle_powers.sum() > target:
            low, low_powers = middle, middle_powers
        else:
            high, high_powers = middle, middle_powers
    spread = low_powers.sum() - high_powers.sum()
    weight = 0.0 if spread <= 0.0 else (
        (target - high_powers.sum()) / spread
    )
    per_user = high_powers + weight * (low_powers - high_powers)
    log.debug(
        "Slope bisection settled at mu in [%.12g, %.12g]", low, high
    )
    return _allocation(
        curves, per_user, 0.5 * (low + high), unit, power, GENERAL_METHOD
    )


def _waterfill(means: Sequence[float], power: float):
    means = [float(mean) for mean in means]
    if any(not mean > 0 for mean in means):
        raise ModelError("Waterfilling needs positive means.")
    target = min(power, math.fsum(means))
    if target >= math.fsum(means):
        return max(means), means
    if target <= 0.0:
        return 0.0, [0.0] * len(means)

    def excess(level):
        return math.fsum(min(level, mean) for mean in means) - target

    level = optimize.brentq(excess, 0.0, max(means), xtol=1e-15)
    return level, [min(level, mean) for mean in means]


def waterfill_exponential(
    means: Sequence[float], power: float, unit: UnitLike = Unit.nats
) -> Allocation:
    """Reverse waterfilling over exponential users.

    Every user gets min(λ, λ_i) where the water level λ meets the budget;
    the leakage is Σ_i (ln(λ_i / λ))⁺.
    """
    if power < 0:
        raise ValueError(f"AES budget must be >= 0, got {power}.")
    level, per_user = _waterfill(means, power)
    curves = [
        ExponentialLeakageCurve(mean, f"user{index}")
        for index, mean in enumerate(means)
    ]
    return _allocation(
        curves, per_user, level, unit, power, WATERFILLING_METHOD
    )


def allocate_binary(
    models: Sequence[BinaryLoadModel],
    power: float,
    unit: UnitLike = Unit.bits,
) -> Allocation:
    return binary_allocate(models, power, unit)


def slb_allocate(
    models: Sequence[ContinuousLoadModel],
    power: float,
    unit: UnitLike = Unit.nats,
) -> Allocation:
    """Lower bound on the multi-user leakage of continuous users.

    Waterfills on e^{h(X_i) - 1}; the bound is Σ_i (h(X_i) - 1 - ln λ)⁺
    with λ the water level.
    """
    if power < 0:
        raise ValueError(f"AES budget must be >= 0, got {power}.")
    curves = [
        SlbLeakageCurve(model, f"user{index}")
        for index, model in enumerate(models)
    ]
    level, per_user = _waterfill([curve.mean for curve in curves], power)
    return _allocation(
        curves, per_user, level, unit, power, SLB_WATERFILLING_METHOD
    )
