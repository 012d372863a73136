# -*- coding: utf-8 -*-
"""Input load models and their basic information quantities.

All models are immutable after construction. Discrete models carry a finite
alphabet of non-negative load levels (energy units per slot), continuous
models a density on the non-negative reals.
"""
import abc
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate
from scipy.special import entr

from privacy_power.lib import (
    PROBABILITY_FLOOR,
    UnitLike,
    entropy_nats,
    from_nats,
)

from .exceptions import DivergentIntegralError, ModelError

log = logging.getLogger(__name__)

PMF_TOLERANCE = 1e-12
DENSITY_MASS_TOLERANCE = 1e-9
MARGINAL_TOLERANCE = 1e-9


def _frozen_array(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DiscreteLoadModel:
    """Finite-alphabet demand distribution of a single user.

    Args:
        alphabet (Sequence[float]): Strictly increasing non-negative levels.
        pmf (Sequence[float]): Probability of each level.

    """

    alphabet: np.ndarray
    pmf: np.ndarray

    def __post_init__(self):
        alphabet = _frozen_array(self.alphabet).reshape(-1)
        pmf = _frozen_array(self.pmf).reshape(-1)
        if alphabet.size < 1:
            raise ModelError("Alphabet must contain at least one level.")
        if alphabet.shape != pmf.shape:
            raise ModelError(
                f"Alphabet has {alphabet.size} levels but pmf has "
                f"{pmf.size} entries."
            )
        if not np.all(np.isfinite(alphabet)) or np.any(alphabet < 0):
            raise ModelError("Load levels must be finite and non-negative.")
        if np.any(np.diff(alphabet) <= 0):
            raise ModelError("Alphabet must be strictly increasing.")
        if np.any(pmf < 0):
            raise ModelError("Probabilities must be non-negative.")
        if abs(pmf.sum() - 1.0) > PMF_TOLERANCE:
            raise ModelError(
                f"Probabilities sum to {pmf.sum():.17g}, expected 1."
            )
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "pmf", pmf)

    @classmethod
    def uniform(cls, size: int, spacing: float, start: float = 0.0):
        """Uniform pmf on {start, start + c, ..., start + (size - 1)c}."""
        if size < 1:
            raise ModelError("Uniform model needs at least one level.")
        alphabet = start + spacing * np.arange(size)
        return cls(alphabet, np.full(size, 1.0 / size))

    @property
    def size(self) -> int:
        return int(self.alphabet.size)

    @property
    def mean(self) -> float:
        return float(self.alphabet @ self.pmf)

    def support(self) -> Tuple[np.ndarray, np.ndarray]:
        """Levels carrying probability mass and their probabilities."""
        keep = self.pmf > PROBABILITY_FLOOR
        return self.alphabet[keep], self.pmf[keep]

    @property
    def min_level(self) -> float:
        """Smallest level carrying probability mass."""
        return float(self.support()[0][0])

    @property
    def perfect_privacy_power(self) -> float:
        """AES power at which the constant output min(X) is affordable."""
        return max(self.mean - self.min_level, 0.0)

    def entropy(self, unit: UnitLike = "bits") -> float:
        return from_nats(entropy_nats(self.pmf), unit)

    def is_uniform(self, tolerance: float = 1e-9) -> bool:
        """Equal probabilities on equally spaced levels."""
        if self.size < 2:
            return True
        steps = np.diff(self.alphabet)
        return bool(
            np.all(np.abs(self.pmf - 1.0 / self.size) <= tolerance)
            and np.all(np.abs(steps - steps[0]) <= tolerance * steps[0])
        )

    @property
    def spacing(self) -> float:
        if self.size < 2:
            return 0.0
        return float(self.alphabet[1] - self.alphabet[0])


@dataclass(frozen=True)
class BinaryLoadModel:
    """Two-level demand: `low` (standby) with probability `p_low`, else
    `high`.

    Args:
        low (float): Standby level L >= 0.
        high (float): Active level H > L.
        p_low (float): Probability of the standby level.

    """

    low: float
    high: float
    p_low: float

    def __post_init__(self):
        if not (0.0 <= self.low < self.high) or math.isinf(self.high):
            raise ModelError(
                f"Binary model needs 0 <= low < high, got "
                f"low={self.low}, high={self.high}."
            )
        if not 0.0 <= self.p_low <= 1.0:
            raise ModelError(f"p_low={self.p_low} is not a probability.")

    @property
    def span(self) -> float:
        return self.high - self.low

    @property
    def mean(self) -> float:
        return self.low + self.span * (1.0 - self.p_low)

    @property
    def perfect_privacy_power(self) -> float:
        """Δ(1 - p), or 0 for a deterministic load."""
        if self.p_low <= PROBABILITY_FLOOR:
            return 0.0
        return self.span * (1.0 - self.p_low)

    def to_discrete(self) -> DiscreteLoadModel:
        return DiscreteLoadModel(
            [self.low, self.high], [self.p_low, 1.0 - self.p_low]
        )

    def entropy(self, unit: UnitLike = "bits") -> float:
        return from_nats(entropy_nats([self.p_low, 1.0 - self.p_low]), unit)


DiscreteModel = Union[DiscreteLoadModel, BinaryLoadModel]


def as_discrete(model: DiscreteModel) -> DiscreteLoadModel:
    if isinstance(model, BinaryLoadModel):
        return model.to_discrete()
    if isinstance(model, DiscreteLoadModel):
        return model
    raise ModelError(f"{type(model).__name__} is not a discrete load model.")


class DensitySegment(abc.ABC):
    """Smooth piece of a density on [start, end).

    Subclasses provide the density and its analytic derivative.
    """

    analytic = True

    def __init__(self, start: float, end: float):
        if start < 0 or not end > start:
            raise ModelError(
                f"Segment bounds must satisfy 0 <= start < end, got "
                f"[{start}, {end})."
            )
        self.start = float(start)
        self.end = float(end)

    def __repr__(self):
        return f"{type(self).__name__}({self.start}, {self.end})"

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.end)

    @abc.abstractmethod
    def density(self, y):
        pass

    @abc.abstractmethod
    def derivative(self, y):
        pass

    def mass(self) -> float:
        return _quad(self.density, self.start, self.end)

    def first_moment(self) -> float:
        return _quad(lambda y: y * self.density(y), self.start, self.end)

    def entropy_integral(self) -> float:
        """Integral of -f ln f over the segment (nats)."""
        return _quad(lambda y: entr(self.density(y)), self.start, self.end)

    def value_at_start(self) -> float:
        return float(self.density(self.start))

    def value_at_end(self) -> float:
        if not self.bounded:
            return 0.0
        return float(self.density(self.end))

    def slb_minimum(self, power: float, samples: int) -> float:
        """Minimum over the segment of f(y) + power * f'(y)."""
        grid = np.linspace(self.start, self.end, samples)
        values = self.density(grid) + power * self.derivative(grid)
        return float(np.min(values))

    def min_density(self, samples: int = 1000) -> float:
        return self.slb_minimum(0.0, samples)


class PolynomialSegment(DensitySegment):
    """Polynomial density on a bounded segment.

    Args:
        coefficients (Sequence[float]): Increasing-degree coefficients in y.

    """

    def __init__(self, start, end, coefficients: Sequence[float]):
        super().__init__(start, end)
        if not self.bounded:
            raise ModelError("Polynomial segments must have a finite end.")
        self.polynomial = Polynomial(list(coefficients))

    def density(self, y):
        return self.polynomial(y)

    def derivative(self, y):
        return self.polynomial.deriv()(y)

    def mass(self) -> float:
        antiderivative = self.polynomial.integ()
        return float(antiderivative(self.end) - antiderivative(self.start))

    def first_moment(self) -> float:
        antiderivative = (Polynomial([0.0, 1.0]) * self.polynomial).integ()
        return float(antiderivative(self.end) - antiderivative(self.start))

    def slb_minimum(self, power: float, samples: int) -> float:
        combined = self.polynomial + power * self.polynomial.deriv()
        candidates = [self.start, self.end]
        if combined.degree() >= 2:
            for root in combined.deriv().roots():
                if abs(root.imag) < 1e-12 and (
                    self.start < root.real < self.end
                ):
                    candidates.append(root.real)
        return float(min(combined(point) for point in candidates))


class ExponentialSegment(DensitySegment):
    """Density `scale * exp(rate * y)` on [start, end)."""

    def __init__(self, start, end, scale: float, rate: float):
        super().__init__(start, end)
        if scale < 0:
            raise ModelError("Exponential segment scale must be >= 0.")
        if not self.bounded and rate >= 0:
            raise ModelError(
                "Unbounded exponential segment needs a negative rate."
            )
        self.scale = float(scale)
        self.rate = float(rate)

    def density(self, y):
        return self.scale * np.exp(self.rate * np.asarray(y, dtype=float))

    def derivative(self, y):
        return self.rate * self.density(y)

    def _antiderivative_at(self, y, moment):
        if math.isinf(y):
            return 0.0
        s, r = self.scale, self.rate
        if r == 0.0:
            return s * y if moment == 0 else 0.5 * s * y * y
        e = math.exp(r * y)
        if moment == 0:
            return s * e / r
        return s * e * (y / r - 1.0 / (r * r))

    def mass(self) -> float:
        return (
            self._antiderivative_at(self.end, 0)
            - self._antiderivative_at(self.start, 0)
        )

    def first_moment(self) -> float:
        return (
            self._antiderivative_at(self.end, 1)
            - self._antiderivative_at(self.start, 1)
        )

    def entropy_integral(self) -> float:
        if self.scale == 0.0:
            return 0.0
        return (
            -math.log(self.scale) * self.mass()
            - self.rate * self.first_moment()
        )

    def slb_minimum(self, power: float, samples: int) -> float:
        factor = 1.0 + power * self.rate
        # Monotone on the segment, extremes sit at the endpoints.
        return float(
            min(factor * self.value_at_start(), factor * self.value_at_end())
        )


class CallableSegment(DensitySegment):
    """Segment given by user callables; sign checks are sampled."""

    analytic = False

    def __init__(
        self,
        start,
        end,
        density: Callable,
        derivative: Callable,
    ):
        super().__init__(start, end)
        if not self.bounded:
            raise ModelError("Callable segments must have a finite end.")
        if derivative is None:
            raise ModelError(
                "Callable segments need an analytic derivative."
            )
        self._density = density
        self._derivative = derivative

    def density(self, y):
        return np.asarray(self._density(y), dtype=float)

    def derivative(self, y):
        return np.asarray(self._derivative(y), dtype=float)


def _quad(function, start, end) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(
                lambda y: float(function(y)), start, end, limit=200
            )
        except integrate.IntegrationWarning as exc:
            raise DivergentIntegralError(
                f"Integral over [{start}, {end}) does not converge: {exc}"
            ) from exc
    if not math.isfinite(value):
        raise DivergentIntegralError(
            f"Integral over [{start}, {end}) is not finite."
        )
    return value


class ContinuousLoadModel(abc.ABC):
    """Demand with a density on the non-negative reals.

    Subclasses provide `mean`, as a field or a property.
    """

    mean: float

    @abc.abstractmethod
    def differential_entropy(self) -> float:
        """h(X) in nats."""

    @abc.abstractmethod
    def as_piecewise(self) -> "PiecewiseLoadModel":
        pass


@dataclass(frozen=True)
class ExponentialLoadModel(ContinuousLoadModel):
    """Exponential demand with mean λ."""

    mean: float

    def __post_init__(self):
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise ModelError(
                f"Exponential mean must be positive, got {self.mean}."
            )

    def differential_entropy(self) -> float:
        return 1.0 + math.log(self.mean)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(
            y >= 0, np.exp(-y / self.mean) / self.mean, 0.0
        )

    def as_piecewise(self) -> "PiecewiseLoadModel":
        return PiecewiseLoadModel((
            ExponentialSegment(
                0.0, math.inf, 1.0 / self.mean, -1.0 / self.mean
            ),
        ))


@dataclass(frozen=True, eq=False)
class PiecewiseLoadModel(ContinuousLoadModel):
    """Density built from sorted, non-overlapping smooth segments.

    Jump points are derived from the segment boundaries: each boundary x
    carries Δ(x) = f(x⁺) - f(x⁻) with f = 0 outside the segments.
    """

    segments: Tuple[DensitySegment, ...]
    _mean: float = field(init=False, repr=False)

    def __post_init__(self):
        segments = tuple(sorted(self.segments, key=lambda s: s.start))
        if not segments:
            raise ModelError("Piecewise density needs at least one segment.")
        for previous, current in zip(segments, segments[1:]):
            if current.start < previous.end:
                raise ModelError(
                    f"Segments {previous!r} and {current!r} overlap."
                )
            if not previous.bounded:
                raise ModelError("Only the last segment may be unbounded.")
        for segment in segments:
            if segment.min_density() < -1e-12:
                raise ModelError(f"Density is negative on {segment!r}.")
        total = sum(segment.mass() for segment in segments)
        if abs(total - 1.0) > DENSITY_MASS_TOLERANCE:
            raise ModelError(
                f"Density integrates to {total:.12g}, expected 1."
            )
        object.__setattr__(self, "segments", segments)
        object.__setattr__(
            self, "_mean", sum(s.first_moment() for s in segments)
        )

    @classmethod
    def uniform(cls, low: float, high: float) -> "PiecewiseLoadModel":
        return cls((PolynomialSegment(low, high, [1.0 / (high - low)]),))

    @property
    def mean(self) -> float:
        return self._mean

    def differential_entropy(self) -> float:
        return sum(segment.entropy_integral() for segment in self.segments)

    def as_piecewise(self) -> "PiecewiseLoadModel":
        return self

    @property
    def analytic(self) -> bool:
        return all(segment.analytic for segment in self.segments)

    def _segment_at(self, y: float) -> Optional[DensitySegment]:
        for segment in self.segments:
            if segment.start <= y < segment.end:
                return segment
        return None

    def density(self, y):
        y = np.asarray(y, dtype=float)
        values = np.zeros_like(y)
        for segment in self.segments:
            inside = (y >= segment.start) & (y < segment.end)
            if np.any(inside):
                values = np.where(inside, segment.density(y), values)
        return values

    def jumps(self) -> Tuple[Tuple[float, float], ...]:
        """Boundary points with a non-zero jump Δ(x) = f(x⁺) - f(x⁻)."""
        points = sorted({
            point
            for segment in self.segments
            for point in (segment.start, segment.end)
            if math.isfinite(point)
        })
        output = []
        for point in points:
            right = 0.0
            left = 0.0
            for segment in self.segments:
                if segment.start == point:
                    right = segment.value_at_start()
                if segment.end == point:
                    left = segment.value_at_end()
            jump = right - left
            if abs(jump) > PROBABILITY_FLOOR:
                output.append((point, jump))
        return tuple(output)


ContinuousModel = Union[ExponentialLoadModel, PiecewiseLoadModel]
LoadModel = Union[DiscreteLoadModel, BinaryLoadModel, ContinuousModel]


def is_discrete(model) -> bool:
    return isinstance(model, (DiscreteLoadModel, BinaryLoadModel))


@dataclass(frozen=True, eq=False)
class MultiUserModel:
    """Demands of N users.

    Users are independent unless `joint_pmf` is given; a joint pmf is
    indexed by the per-user alphabets (shape = alphabet sizes) and must
    reproduce every user's pmf as its marginal.
    """

    users: Tuple[LoadModel, ...]
    joint_pmf: Optional[np.ndarray] = None

    def __post_init__(self):
        users = tuple(self.users)
        if not users:
            raise ModelError("At least one user is required.")
        object.__setattr__(self, "users", users)
        if self.joint_pmf is None:
            return
        if not all(is_discrete(user) for user in users):
            raise ModelError("A joint pmf requires discrete users only.")
        joint = _frozen_array(self.joint_pmf)
        discrete = [as_discrete(user) for user in users]
        shape = tuple(user.size for user in discrete)
        if joint.shape != shape:
            raise ModelError(
                f"Joint pmf has shape {joint.shape}, expected {shape}."
            )
        if np.any(joint < 0) or abs(joint.sum() - 1.0) > PMF_TOLERANCE:
            raise ModelError("Joint pmf is not a probability distribution.")
        for index, user in enumerate(discrete):
            axes = tuple(a for a in range(len(shape)) if a != index)
            marginal = joint.sum(axis=axes) if axes else joint
            if np.max(np.abs(marginal - user.pmf)) > MARGINAL_TOLERANCE:
                raise ModelError(
                    f"Joint pmf marginal of user {index} does not match "
                    "its model."
                )
        object.__setattr__(self, "joint_pmf", joint)

    @property
    def independent(self) -> bool:
        return self.joint_pmf is None

    @property
    def discrete(self) -> bool:
        return all(is_discrete(user) for user in self.users)

    def __len__(self):
        return len(self.users)


def entropy(model: DiscreteModel, unit: UnitLike = "bits") -> float:
    """Shannon entropy H(X) with 0 log 0 := 0."""
    return as_discrete(model).entropy(unit)


def differential_entropy(model: ContinuousLoadModel) -> float:
    """Differential entropy h(X) in nats.

    Raises:
        DivergentIntegralError: When -f ln f is not integrable.

    """
    if not isinstance(model, ContinuousLoadModel):
        raise ModelError(
            f"{type(model).__name__} has no differential entropy."
        )
    return model.differential_entropy()


def mean(model) -> float:
    """Expected load of any single-user model."""
    return float(model.mean)
