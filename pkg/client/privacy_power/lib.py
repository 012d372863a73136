# -*- coding: utf-8 -*-
"""Information-theoretic helpers shared by the solvers."""
import enum
import math
from typing import Callable, Tuple, Union

import numpy as np
from scipy.special import entr

# Probabilities below this are exact zeros in entropy sums.
PROBABILITY_FLOOR = 1e-15
LN2 = math.log(2.0)


class Unit(str, enum.Enum):
    bits = "bits"
    nats = "nats"


UnitLike = Union[Unit, str]


def get_unit(unit: UnitLike) -> Unit:
    """Return `Unit` from its name.

    Raises:
        ValueError: For unknown unit names.

    """
    if isinstance(unit, Unit):
        return unit
    try:
        return Unit(str(unit).lower())
    except ValueError:
        raise ValueError(
            f"Unknown information unit '{unit}'. Use 'bits' or 'nats'."
        ) from None


def from_nats(value: float, unit: UnitLike) -> float:
    """Convert a quantity in nats into `unit`."""
    if get_unit(unit) is Unit.bits:
        return value / LN2
    return value


def to_nats(value: float, unit: UnitLike) -> float:
    if get_unit(unit) is Unit.bits:
        return value * LN2
    return value


def clean_pmf(pmf) -> np.ndarray:
    """Copy of `pmf` with entries below the probability floor zeroed."""
    pmf = np.array(pmf, dtype=float)
    pmf[np.abs(pmf) < PROBABILITY_FLOOR] = 0.0
    return pmf


def entropy_nats(pmf) -> float:
    """Shannon entropy of a (possibly multi-dimensional) pmf in nats."""
    return float(entr(clean_pmf(pmf)).sum())


def binary_entropy_nats(p: float) -> float:
    return entropy_nats([p, 1.0 - p])


def mutual_information_nats(pmf, conditional) -> float:
    """Mutual information I(X;Y) of input pmf and channel rows.

    Args:
        pmf (array): Input probabilities, shape (K,).
        conditional (array): Rows f(y|x), shape (K, M).

    Returns:
        float: I(X;Y) = H(Y) - H(Y|X) in nats, clipped at zero.

    """
    pmf = clean_pmf(pmf)
    conditional = clean_pmf(conditional)
    output = pmf @ conditional
    value = entropy_nats(output) - float(
        pmf @ entr(conditional).sum(axis=1)
    )
    return max(value, 0.0)


def bisect_predicate(
    predicate: Callable[[float], bool],
    low: float,
    high: float,
    tolerance: float,
    max_steps: int = 400,
) -> Tuple[float, float]:
    """Shrink [low, high] around the switch point of a monotone predicate.

    `predicate(low)` is expected to hold and `predicate(high)` not to.

    Returns:
        tuple[float, float]: Final bracket, `predicate` holds at the first
            value and fails at the second.

    """
    for _ in range(max_steps):
        if high - low <= tolerance:
            break
        middle = 0.5 * (low + high)
        if predicate(middle):
            low = middle
        else:
            high = middle
    return low, high


def format_float(value: float) -> str:
    """Lossless decimal representation used by the CSV writers."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"
