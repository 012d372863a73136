# -*- coding: utf-8 -*-
"""Baseline energy management policies.

Time division serves the whole demand of a slot either from the AES or
from the grid. Limit-max-output caps the grid reading at level k and lets
the AES cover the rest. Leakages are exact mutual informations of the
resulting conditional pmfs.
"""
import enum
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from privacy_power.lib import Unit, UnitLike, from_nats, get_unit

from .exceptions import UnsupportedScenarioError
from .models import BinaryLoadModel, DiscreteLoadModel, as_discrete
from .results import CurvePoint, Policy, PrivacyCurve

log = logging.getLogger(__name__)

TIME_DIVISION = "time-division"
TIME_DIVISION_BOUND = "time-division-bound"
LIMIT_MAX = "limit-max"
LIMIT_MAX_BOUND = "limit-max-bound"
LIMIT_MAX_CLIPPED = "limit-max-clipped (extension)"

DiscreteModel = Union[DiscreteLoadModel, BinaryLoadModel]


class HeuristicKind(str, enum.Enum):
    time_division = "time_division"
    limit_max_output = "limit_max_output"


@dataclass(frozen=True)
class HeuristicSpec:
    """Heuristic policy selector.

    Args:
        kind (HeuristicKind): Policy family.
        threshold (int, optional): Level index k of limit-max-output.
        power (float, optional): AES power of time division.

    """

    kind: HeuristicKind
    threshold: Optional[int] = None
    power: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", HeuristicKind(self.kind))
        if self.kind is HeuristicKind.limit_max_output:
            if self.threshold is None:
                raise ValueError("Limit-max-output needs a threshold k.")
        elif self.power is None or self.power < 0:
            raise ValueError("Time division needs a power >= 0.")

    def validate(self, model: DiscreteModel):
        if self.kind is HeuristicKind.limit_max_output:
            _check_threshold(as_discrete(model), self.threshold)


def _check_threshold(model: DiscreteLoadModel, threshold: int):
    if not 0 <= threshold <= model.size - 1:
        raise ValueError(
            f"Threshold k={threshold} is outside 0..{model.size - 1}."
        )


def _aes_probability(model: DiscreteLoadModel, power: float) -> float:
    if power < 0:
        raise ValueError(f"AES power must be >= 0, got {power}.")
    if model.mean <= 0.0:
        return 1.0
    return min(power / model.mean, 1.0)


def time_division_policy(model: DiscreteModel, power: float) -> Policy:
    """Y = 0 with probability min(P/E[X], 1), else Y = X."""
    model = as_discrete(model)
    share = _aes_probability(model, power)
    outputs = model.alphabet
    if outputs[0] > 0.0:
        outputs = np.insert(outputs, 0, 0.0)
    offset = outputs.size - model.size
    matrix = np.zeros((model.size, outputs.size))
    matrix[:, 0] = share
    matrix[np.arange(model.size), np.arange(model.size) + offset] += (
        1.0 - share
    )
    return Policy(model.alphabet, outputs, matrix)


def time_division(
    model: DiscreteModel, power: float, unit: UnitLike = Unit.bits
) -> CurvePoint:
    """Leakage of randomized source selection at AES power `power`.

    Powers above E[X] clamp to the always-AES policy with zero leakage.
    """
    model = as_discrete(model)
    policy = time_division_policy(model, power)
    return CurvePoint(
        policy.power(model.pmf),
        policy.leakage(model.pmf, unit),
        unit,
        TIME_DIVISION,
    )


def time_division_bound(
    model: DiscreteModel, power: float, unit: UnitLike = Unit.bits
) -> CurvePoint:
    """(1 - P/E[X]) H(X), an upper bound on the time division leakage.

    The bound is tight when a zero reading cannot also come from the grid.
    """
    model = as_discrete(model)
    share = _aes_probability(model, power)
    return CurvePoint(
        share * model.mean,
        (1.0 - share) * model.entropy(unit),
        unit,
        TIME_DIVISION_BOUND,
    )


def limit_max_output_policy(model: DiscreteModel, threshold: int) -> Policy:
    """Y = min(X, x_k)."""
    model = as_discrete(model)
    _check_threshold(model, threshold)
    matrix = np.zeros((model.size, model.size))
    rows = np.arange(model.size)
    matrix[rows, np.minimum(rows, threshold)] = 1.0
    return Policy(model.alphabet, model.alphabet, matrix)


def _uniform_model(
    model: DiscreteModel, threshold: int
) -> DiscreteLoadModel:
    model = as_discrete(model)
    if not model.is_uniform():
        raise UnsupportedScenarioError(
            "Limit-max-output is defined for uniform models only, "
            "use the clipped extension for other pmfs."
        )
    _check_threshold(model, threshold)
    return model


def _limit_max_power(model: DiscreteLoadModel, threshold: int) -> float:
    """P = (N - 1 - k)(N - k)c / (2N)."""
    size = model.size
    remaining = size - threshold
    return (size - 1 - threshold) * remaining * model.spacing / (2 * size)


def limit_max_output(
    model: DiscreteModel, threshold: int, unit: UnitLike = Unit.bits
) -> CurvePoint:
    """Limit-max-output point of a uniform model with N levels.

    P = (N - 1 - k)(N - k)c / (2N) and
    I = log N - ((N - k)/N) log(N - k).

    Raises:
        UnsupportedScenarioError: Model is not uniform on equally spaced
            levels; use `limit_max_output_clipped` instead.

    """
    model = _uniform_model(model, threshold)
    size = model.size
    remaining = size - threshold
    power = _limit_max_power(model, threshold)
    leakage = np.log(size) - remaining / size * np.log(remaining)
    return CurvePoint(
        power,
        from_nats(max(float(leakage), 0.0), unit),
        unit,
        LIMIT_MAX,
        None,
    )


def limit_max_output_bound(
    model: DiscreteModel, threshold: int, unit: UnitLike = Unit.bits
) -> CurvePoint:
    """Published closed form of the limit-max-output leakage.

    I = log N - ((N - k)/(2N)) log(N - k) at the same P as
    `limit_max_output`. It overstates the exact leakage for k < N - 1
    (at k = 0 it is H(X)/2 while the reading is constant) and agrees with
    it at k = N - 1.

    Raises:
        UnsupportedScenarioError: Model is not uniform.

    """
    model = _uniform_model(model, threshold)
    size = model.size
    remaining = size - threshold
    leakage = np.log(size) - remaining / (2 * size) * np.log(remaining)
    return CurvePoint(
        _limit_max_power(model, threshold),
        from_nats(float(leakage), unit),
        unit,
        LIMIT_MAX_BOUND,
    )


def limit_max_output_clipped(
    model: DiscreteModel, threshold: int, unit: UnitLike = Unit.bits
) -> CurvePoint:
    """Clip at level k for any pmf; the power and leakage follow from the
    pmf tail above x_k."""
    model = as_discrete(model)
    policy = limit_max_output_policy(model, threshold)
    return CurvePoint(
        policy.power(model.pmf),
        policy.leakage(model.pmf, unit),
        unit,
        LIMIT_MAX_CLIPPED,
    )


def limit_max_output_curve(
    model: DiscreteModel, unit: UnitLike = Unit.bits
) -> PrivacyCurve:
    """One point per threshold k = 0..N-1.

    Uniform models use the closed form, other pmfs the clipped extension.
    The points are not interpolated.
    """
    model = as_discrete(model)
    unit = get_unit(unit)
    if model.is_uniform():
        point = limit_max_output
        label = LIMIT_MAX
    else:
        log.info("Model is not uniform, using the clipped extension")
        point = limit_max_output_clipped
        label = LIMIT_MAX_CLIPPED
    return PrivacyCurve(
        tuple(point(model, k, unit) for k in range(model.size)), label
    )


def heuristic_policy(model: DiscreteModel, spec: HeuristicSpec) -> Policy:
    """Explicit conditional pmf of a heuristic, for replay."""
    spec.validate(model)
    if spec.kind is HeuristicKind.time_division:
        return time_division_policy(model, spec.power)
    return limit_max_output_policy(model, spec.threshold)
