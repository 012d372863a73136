# -*- coding: utf-8 -*-
"""Result containers shared by solvers, allocators and the task pipeline."""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from privacy_power.lib import (
    PROBABILITY_FLOOR,
    Unit,
    UnitLike,
    from_nats,
    get_unit,
    mutual_information_nats,
    to_nats,
)

from .exceptions import PolicyError

ROW_SUM_TOLERANCE = 1e-10
LEVEL_TOLERANCE = 1e-12


def _as_levels(levels) -> np.ndarray:
    levels = np.array(levels, dtype=float)
    if levels.ndim == 1:
        levels = levels[:, None]
    if levels.ndim != 2:
        raise PolicyError("Levels must be a vector or a (K, N) matrix.")
    levels.setflags(write=False)
    return levels


def feasibility_mask(input_levels, output_levels) -> np.ndarray:
    """Boolean (K, M) matrix, True where y_i <= x_i for every user."""
    x = _as_levels(input_levels)
    y = _as_levels(output_levels)
    return np.all(
        y[None, :, :] <= x[:, None, :] + LEVEL_TOLERANCE, axis=2
    )


def distortion_matrix(input_levels, output_levels) -> np.ndarray:
    """d(x, y) = Σ_i (x_i - y_i), set to +inf where the pair is disallowed."""
    x = _as_levels(input_levels)
    y = _as_levels(output_levels)
    distortion = x.sum(axis=1)[:, None] - y.sum(axis=1)[None, :]
    return np.where(feasibility_mask(x, y), distortion, np.inf)


@dataclass(frozen=True, eq=False)
class Policy:
    """Memoryless conditional pmf f(y|x) of the energy management unit.

    Rows are indexed by input levels, columns by output levels. Levels are
    (K, N) matrices for N users (a vector is read as a single user).
    """

    input_levels: np.ndarray
    output_levels: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        x = _as_levels(self.input_levels)
        y = _as_levels(self.output_levels)
        matrix = np.array(self.matrix, dtype=float)
        if x.shape[1] != y.shape[1]:
            raise PolicyError(
                f"Input levels have {x.shape[1]} users, output levels "
                f"{y.shape[1]}."
            )
        if matrix.shape != (x.shape[0], y.shape[0]):
            raise PolicyError(
                f"Policy matrix has shape {matrix.shape}, expected "
                f"{(x.shape[0], y.shape[0])}."
            )
        if np.any(matrix < -PROBABILITY_FLOOR):
            raise PolicyError("Policy has negative probabilities.")
        matrix = np.clip(matrix, 0.0, None)
        row_error = np.max(np.abs(matrix.sum(axis=1) - 1.0))
        if row_error > ROW_SUM_TOLERANCE:
            raise PolicyError(
                f"Policy rows do not sum to one (max error {row_error:.3g})."
            )
        leaked = matrix[~feasibility_mask(x, y)]
        if leaked.size and leaked.max() > PROBABILITY_FLOOR:
            raise PolicyError(
                "Policy puts mass on outputs above the input load "
                f"(max {leaked.max():.3g})."
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "input_levels", x)
        object.__setattr__(self, "output_levels", y)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, levels) -> "Policy":
        levels = _as_levels(levels)
        return cls(levels, levels, np.eye(levels.shape[0]))

    @classmethod
    def constant(cls, levels, output) -> "Policy":
        """Policy emitting the single output level `output` for every x."""
        output = np.atleast_1d(np.asarray(output, dtype=float))
        levels = _as_levels(levels)
        return cls(
            levels, output[None, :], np.ones((levels.shape[0], 1))
        )

    @property
    def users(self) -> int:
        return self.input_levels.shape[1]

    def distortion(self) -> np.ndarray:
        return distortion_matrix(self.input_levels, self.output_levels)

    def power(self, pmf) -> float:
        """Average AES power E[Σ_i (X_i - Y_i)] under input pmf."""
        distortion = self.distortion()
        distortion = np.where(np.isfinite(distortion), distortion, 0.0)
        return float(np.asarray(pmf, dtype=float) @ (
            self.matrix * distortion
        ).sum(axis=1))

    def leakage(self, pmf, unit: UnitLike = Unit.bits) -> float:
        """Exact I(X;Y) of the policy under input pmf."""
        return from_nats(mutual_information_nats(pmf, self.matrix), unit)

    def output_marginal(self, pmf) -> np.ndarray:
        return np.asarray(pmf, dtype=float) @ self.matrix

    def mix(self, other: "Policy", weight: float) -> "Policy":
        """Time-sharing `weight * self + (1 - weight) * other`."""
        if (
            self.matrix.shape != other.matrix.shape
            or not np.array_equal(self.output_levels, other.output_levels)
        ):
            raise PolicyError("Only policies on one alphabet can be mixed.")
        return Policy(
            self.input_levels,
            self.output_levels,
            weight * self.matrix + (1.0 - weight) * other.matrix,
        )

    def to_dict(self) -> dict:
        return {
            "input_levels": self.input_levels.tolist(),
            "output_levels": self.output_levels.tolist(),
            "matrix": self.matrix.tolist(),
        }


@dataclass(frozen=True)
class CurvePoint:
    """One (P, I) pair.

    Attributes:
        power (float): Average AES power P.
        leakage (float): Leakage rate I, `math.inf` when unbounded.
        unit (Unit): Unit of `leakage`.
        solver (str): Provenance tag.
        multiplier (Optional[float]): Lagrange slope s <= 0 behind the point.

    """

    power: float
    leakage: float
    unit: Unit = Unit.bits
    solver: str = ""
    multiplier: Optional[float] = None

    def __post_init__(self):
        if self.power < -LEVEL_TOLERANCE or math.isnan(self.power):
            raise ValueError(f"Negative power {self.power}.")
        if self.leakage < 0 or math.isnan(self.leakage):
            raise ValueError(f"Negative leakage {self.leakage}.")
        object.__setattr__(self, "power", max(float(self.power), 0.0))
        object.__setattr__(self, "leakage", float(self.leakage))
        object.__setattr__(self, "unit", get_unit(self.unit))

    def in_unit(self, unit: UnitLike) -> "CurvePoint":
        unit = get_unit(unit)
        if unit is self.unit:
            return self
        return CurvePoint(
            self.power,
            from_nats(to_nats(self.leakage, self.unit), unit),
            unit,
            self.solver,
            self.multiplier,
        )

    def to_row(self) -> list:
        return [self.power, self.leakage, self.unit.value, self.solver]

    def to_dict(self) -> dict:
        return {
            "P": self.power,
            "I": self.leakage,
            "unit": self.unit.value,
            "solver": self.solver,
            "multiplier": self.multiplier,
        }


@dataclass(frozen=True)
class PrivacyCurve:
    """Sequence of curve points sharing a unit."""

    points: Tuple[CurvePoint, ...]
    label: str = ""
    policies: Tuple[Optional[Policy], ...] = field(
        default=(), repr=False, compare=False
    )

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "policies", tuple(self.policies))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, index):
        return self.points[index]

    @property
    def powers(self) -> np.ndarray:
        return np.array([point.power for point in self.points])

    @property
    def leakages(self) -> np.ndarray:
        return np.array([point.leakage for point in self.points])

    def in_unit(self, unit: UnitLike) -> "PrivacyCurve":
        return PrivacyCurve(
            tuple(point.in_unit(unit) for point in self.points),
            self.label,
            self.policies,
        )

    def is_monotone(self, tolerance: float = 1e-9) -> bool:
        return is_non_increasing(self.powers, self.leakages, tolerance)

    def is_convex(self, tolerance: float = 1e-6) -> bool:
        return is_midpoint_convex(self.powers, self.leakages, tolerance)

    def to_rows(self) -> List[list]:
        return [point.to_row() for point in self.points]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "points": [point.to_dict() for point in self.points],
        }


def _finite_sorted(powers, leakages) -> Tuple[np.ndarray, np.ndarray]:
    powers = np.asarray(powers, dtype=float)
    leakages = np.asarray(leakages, dtype=float)
    keep = np.isfinite(leakages)
    order = np.argsort(powers[keep], kind="stable")
    return powers[keep][order], leakages[keep][order]


def is_non_increasing(powers, leakages, tolerance: float = 1e-9) -> bool:
    """P1 < P2 implies I(P1) >= I(P2) - tolerance."""
    powers, leakages = _finite_sorted(powers, leakages)
    if powers.size < 2:
        return True
    # Running minimum from the left must dominate every later value.
    running_min = np.minimum.accumulate(leakages)
    return bool(np.all(leakages[1:] <= running_min[:-1] + tolerance))


def is_midpoint_convex(powers, leakages, tolerance: float = 1e-6) -> bool:
    """For any three points, the middle one lies on or below the chord."""
    powers, leakages = _finite_sorted(powers, leakages)
    size = powers.size
    if size < 3:
        return True
    i, j, k = np.meshgrid(
        np.arange(size), np.arange(size), np.arange(size), indexing="ij"
    )
    valid = (i < j) & (j < k)
    valid &= powers[k] - powers[i] > LEVEL_TOLERANCE
    if not np.any(valid):
        return True
    i, j, k = i[valid], j[valid], k[valid]
    weight = (powers[j] - powers[i]) / (powers[k] - powers[i])
    chord = leakages[i] + weight * (leakages[k] - leakages[i])
    return bool(np.all(leakages[j] <= chord + tolerance))


@dataclass(frozen=True)
class Allocation:
    """Split of the AES budget across independent users.

    Attributes:
        per_user (tuple[float]): P_i* per user.
        level (float): Lagrange multiplier or water level.
        total_leakage (float): Σ_i I_i(P_i*) in `unit`.
        unit (Unit): Unit of the leakage values.
        saturated (tuple[bool]): User already fully private.
        per_user_leakage (tuple[float]): I_i(P_i*) per user.
        budget (float): Requested total power P.
        method (str): Allocator provenance tag.

    """

    per_user: Tuple[float, ...]
    level: float
    total_leakage: float
    unit: Unit
    saturated: Tuple[bool, ...]
    per_user_leakage: Tuple[float, ...] = ()
    budget: float = 0.0
    method: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "per_user", tuple(float(p) for p in self.per_user)
        )
        object.__setattr__(
            self, "saturated", tuple(bool(s) for s in self.saturated)
        )
        object.__setattr__(
            self,
            "per_user_leakage",
            tuple(float(i) for i in self.per_user_leakage),
        )
        object.__setattr__(self, "unit", get_unit(self.unit))

    @property
    def used_power(self) -> float:
        return math.fsum(self.per_user)

    def in_unit(self, unit: UnitLike) -> "Allocation":
        unit = get_unit(unit)

        def convert(value):
            return from_nats(to_nats(value, self.unit), unit)

        return Allocation(
            self.per_user,
            self.level,
            convert(self.total_leakage),
            unit,
            self.saturated,
            tuple(convert(value) for value in self.per_user_leakage),
            self.budget,
            self.method,
        )

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "budget": self.budget,
            "level": self.level,
            "per_user": list(self.per_user),
            "per_user_leakage": list(self.per_user_leakage),
            "saturated": list(self.saturated),
            "total_leakage": self.total_leakage,
            "unit": self.unit.value,
        }


def sum_leakage(values: Sequence[float]) -> float:
    """Sum that keeps an unbounded term unbounded."""
    if any(math.isinf(value) for value in values):
        return math.inf
    return math.fsum(values)
