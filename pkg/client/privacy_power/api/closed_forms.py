# -*- coding: utf-8 -*-
"""Closed-form privacy-power functions and the Shannon lower bound.

Binary loads have an exact I(P) and allocation rule, exponential loads
meet the Shannon lower bound h(X) - ln(eP) with equality below their mean.
For other continuous densities the bound is achievable as long as
g(y) = f(y) + P f'(y) together with the atoms P * Δ(x) at the jump points
of f stays non-negative, which holds up to a single critical power.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from scipy.special import entr

from privacy_power.lib import (
    PROBABILITY_FLOOR,
    Unit,
    UnitLike,
    bisect_predicate,
    from_nats,
    get_unit,
)
from privacy_power.settings import SlbSettings

from .exceptions import ModelError, PolicyError
from .models import (
    BinaryLoadModel,
    ContinuousLoadModel,
    PiecewiseLoadModel,
    differential_entropy,
)
from .results import Allocation, CurvePoint, Policy, PrivacyCurve

log = logging.getLogger(__name__)

BINARY_SOLVER = "closed-form-binary"
EXPONENTIAL_SOLVER = "closed-form-exponential"
SLB_SOLVER = "shannon-lower-bound"
SLB_VALUE_TOLERANCE = 1e-12


def _check_power(power: float):
    if power < 0 or math.isnan(power):
        raise ValueError(f"AES power must be >= 0, got {power}.")


def binary_leakage(
    model: BinaryLoadModel, power: float, unit: UnitLike = Unit.bits
) -> float:
    """Exact leakage of a binary load at AES power `power`.

    With q = P/Δ the leakage is q log q - (p + q) log(p + q)
    - (1 - p) log(1 - p), clipped at zero.
    """
    _check_power(power)
    if power >= model.perfect_privacy_power:
        return 0.0
    p = model.p_low
    q = power / model.span
    value = -entr(q) + entr(p + q) + entr(1.0 - p)
    return from_nats(max(float(value), 0.0), unit)


def binary_leakage_derivative(model: BinaryLoadModel, power: float) -> float:
    """dI/dP in nats per energy unit, -inf at P = 0."""
    _check_power(power)
    if power >= model.perfect_privacy_power:
        return 0.0
    if power == 0.0:
        return -math.inf
    q = power / model.span
    return math.log(q / (model.p_low + q)) / model.span


def binary_power_at_slope(model: BinaryLoadModel, slope: float) -> float:
    """Power at which the binary curve has slope -`slope` (nats)."""
    saturation = model.perfect_privacy_power
    if saturation <= 0.0:
        return 0.0
    if math.isinf(slope):
        return 0.0
    denominator = math.expm1(slope * model.span)
    if denominator <= 0.0:
        return saturation
    return min(model.span * model.p_low / denominator, saturation)


def binary_policy(model: BinaryLoadModel, power: float) -> Policy:
    """Optimal conditional of a binary load.

    The joint pmf is [[p, 0], [q, 1 - p - q]] over (low, high) x
    (low, high) with q = min(P, Δ(1 - p)) / Δ.
    """
    _check_power(power)
    p = model.p_low
    q = min(power, model.perfect_privacy_power) / model.span
    high_row = [0.0, 1.0]
    if 1.0 - p > PROBABILITY_FLOOR:
        high_row = [q / (1.0 - p), 1.0 - q / (1.0 - p)]
    levels = [model.low, model.high]
    return Policy(levels, levels, [[1.0, 0.0], high_row])


def binary_leakage_curve(
    model: BinaryLoadModel,
    power_grid: Sequence[float],
    unit: UnitLike = Unit.bits,
) -> PrivacyCurve:
    unit = get_unit(unit)
    points = []
    for power in power_grid:
        slope = binary_leakage_derivative(model, power)
        points.append(
            CurvePoint(
                power,
                binary_leakage(model, power, unit),
                unit,
                BINARY_SOLVER,
                slope,
            )
        )
    return PrivacyCurve(tuple(points), BINARY_SOLVER)


def binary_allocate(
    models: Sequence[BinaryLoadModel],
    power: float,
    unit: UnitLike = Unit.bits,
) -> Allocation:
    """Optimal split of `power` across independent binary users.

    The multiplier λ solves Σ_i P_i*(λ) = min(P, Σ_i Δ_i(1 - p_i)) where
    P_i*(λ) = Δ_i p_i / (e^{λΔ_i} - 1), capped at the user's
    perfect-privacy power. λ is reported in nats per energy unit.
    """
    _check_power(power)
    unit = get_unit(unit)
    models = list(models)
    saturation = [model.perfect_privacy_power for model in models]
    target = min(power, math.fsum(saturation))

    def allocation_at(level):
        return [binary_power_at_slope(model, level) for model in models]

    if target >= math.fsum(saturation):
        level = 0.0
        per_user = list(saturation)
    elif target <= 0.0:
        level = math.inf
        per_user = [0.0] * len(models)
    else:
        def excess(level):
            return math.fsum(allocation_at(level)) - target

        high = 1.0
        while excess(high) > 0.0:
            high *= 2.0
        level = optimize.brentq(excess, 0.0, high, xtol=1e-13, maxiter=500)
        per_user = allocation_at(level)

    leakages = [
        binary_leakage(model, share, unit)
        for model, share in zip(models, per_user)
    ]
    return Allocation(
        per_user=tuple(per_user),
        level=level,
        total_leakage=math.fsum(leakages),
        unit=unit,
        saturated=tuple(
            share >= limit - 1e-12
            for share, limit in zip(per_user, saturation)
        ),
        per_user_leakage=tuple(leakages),
        budget=power,
        method=BINARY_SOLVER,
    )


def exponential_leakage(
    mean: float, power: float, unit: UnitLike = Unit.nats
) -> float:
    """ln(λ/P) for P <= λ, else 0. P = 0 is unbounded (`math.inf`)."""
    if not mean > 0:
        raise ModelError(f"Exponential mean must be positive, got {mean}.")
    _check_power(power)
    if power == 0.0:
        return math.inf
    if power >= mean:
        return 0.0
    return from_nats(math.log(mean / power), unit)


def exponential_leakage_derivative(mean: float, power: float) -> float:
    _check_power(power)
    if power == 0.0:
        return -math.inf
    if power >= mean:
        return 0.0
    return -1.0 / power


@dataclass(frozen=True)
class ExponentialPolicy:
    """Achieving conditional of an exponential load of mean λ at power P.

    Given x, Y = 0 with probability exp(-r x), otherwise Y has density
    r exp(-r (x - y)) on (0, x], where r = 1/P - 1/λ. Sampling draws
    V' ~ Exp(rate r) and returns max(x - V', 0). The AES share V = X - Y
    is Exponential(P) and independent of Y.
    """

    mean: float
    power: float

    def __post_init__(self):
        if not self.mean > 0:
            raise PolicyError(
                f"Exponential mean must be positive, got {self.mean}."
            )
        if not self.power > 0:
            raise PolicyError(
                "The exponential policy needs P > 0, zero power forces "
                "Y = X."
            )
        if self.power > self.mean * (1.0 + 1e-12):
            raise PolicyError(
                f"P={self.power} exceeds the mean {self.mean}: the atom "
                "weight at zero would exceed one."
            )

    @property
    def rate(self) -> float:
        return max(1.0 / self.power - 1.0 / self.mean, 0.0)

    @property
    def atom_weight(self) -> float:
        """Mass of the output marginal at y = 0."""
        return min(self.power / self.mean, 1.0)

    def atom_probability(self, x):
        """P(Y = 0 | X = x)."""
        return np.exp(-self.rate * np.asarray(x, dtype=float))

    def conditional_density(self, y, x):
        """Continuous part of f(y|x) on (0, x]."""
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        inside = (y > 0) & (y <= x)
        return np.where(inside, self.rate * np.exp(-self.rate * (x - y)), 0.0)

    def output_density(self, y):
        """Continuous part of the output marginal, (1 - P/λ)(1/λ)e^{-y/λ}."""
        y = np.asarray(y, dtype=float)
        weight = 1.0 - self.atom_weight
        return np.where(
            y > 0, weight * np.exp(-y / self.mean) / self.mean, 0.0
        )

    def sample(self, x, rng: np.random.Generator) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.rate == 0.0:
            return np.zeros_like(x)
        backoff = rng.exponential(1.0 / self.rate, size=x.shape)
        return np.maximum(x - backoff, 0.0)

    def to_dict(self) -> dict:
        return {
            "kind": "exponential",
            "mean": self.mean,
            "power": self.power,
            "rate": self.rate,
            "atom_weight": self.atom_weight,
        }


def exponential_policy(mean: float, power: float) -> ExponentialPolicy:
    return ExponentialPolicy(mean, power)


def slb_bound(
    model: ContinuousLoadModel, power: float, unit: UnitLike = Unit.nats
) -> float:
    """(h(X) - ln(eP))⁺, unbounded at P = 0.

    ln(eP) = 1 + ln P is the entropy of an exponential AES share of
    mean P, the largest among non-negative shares with that mean.
    """
    _check_power(power)
    entropy = differential_entropy(model)
    if power == 0.0:
        return math.inf
    return from_nats(max(entropy - 1.0 - math.log(power), 0.0), unit)


@dataclass(frozen=True)
class SlbConditional:
    """Conditional achieving the lower bound: Y = X - V with V exponential
    of mean P and independent of Y, f(y|x) = f_V(x - y) g(y) / f(x)."""

    model: PiecewiseLoadModel
    power: float
    atoms: Tuple[Tuple[float, float], ...]

    def noise_density(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(
            v >= 0, np.exp(-v / self.power) / self.power, 0.0
        )

    def output_density(self, y):
        y = np.asarray(y, dtype=float)
        values = np.zeros_like(y)
        for segment in self.model.segments:
            inside = (y >= segment.start) & (y < segment.end)
            if np.any(inside):
                values = np.where(
                    inside,
                    segment.density(y) + self.power * segment.derivative(y),
                    values,
                )
        return values

    def density(self, y, x):
        """Continuous part of f(y|x)."""
        return (
            self.noise_density(np.asarray(x) - np.asarray(y))
            * self.output_density(y)
            / self.model.density(x)
        )

    def atom_probabilities(self, x) -> Tuple[Tuple[float, float], ...]:
        """P(Y = x_i | X = x) for every atom x_i <= x."""
        density = float(self.model.density(x))
        return tuple(
            (point, float(self.noise_density(x - point)) * weight / density)
            for point, weight in self.atoms
            if point <= x
        )

    def to_dict(self) -> dict:
        return {
            "kind": "exponential-noise",
            "noise_mean": self.power,
            "atoms": [list(atom) for atom in self.atoms],
        }


@dataclass(frozen=True)
class SlbReport:
    """Sign check of g(y) = f(y) + P f'(y) and its atoms at one power.

    Attributes:
        power (float): Requested power P = E[V].
        continuous_minimum (float): Smallest value of the continuous part.
        atoms (tuple): (x_i, P * Δ(x_i)) at every jump point.
        nonneg (bool): Continuous part and atoms are non-negative.
        critical_power (float): Largest power for which `nonneg` holds.
        total_mass (float): Mass of the continuous part plus the atoms.
        method (str): "analytic" or "numerical" sign checks.
        bound (float): Lower bound (h(X) - ln(eP))⁺ in nats.
        conditional (SlbConditional): Achieving conditional, present iff
            `nonneg`.

    """

    power: float
    continuous_minimum: float
    atoms: Tuple[Tuple[float, float], ...]
    nonneg: bool
    critical_power: float
    total_mass: float
    method: str
    bound: float
    conditional: Optional[SlbConditional] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "power": self.power,
            "continuous_minimum": self.continuous_minimum,
            "atoms": [list(atom) for atom in self.atoms],
            "nonneg": self.nonneg,
            "critical_power": self.critical_power,
            "total_mass": self.total_mass,
            "method": self.method,
            "bound": self.bound,
            "unit": Unit.nats.value,
            "conditional": (
                self.conditional.to_dict() if self.conditional else None
            ),
        }


def _piecewise(model) -> PiecewiseLoadModel:
    if not isinstance(model, ContinuousLoadModel):
        raise ModelError(
            f"The Shannon lower bound needs a continuous model, got "
            f"{type(model).__name__}."
        )
    return model.as_piecewise()


def _slb_state(
    model: PiecewiseLoadModel, power: float, samples: int
) -> Tuple[bool, float, Tuple[Tuple[float, float], ...]]:
    minimum = min(
        segment.slb_minimum(power, samples) for segment in model.segments
    )
    atoms = tuple((point, power * jump) for point, jump in model.jumps())
    nonneg = minimum >= -SLB_VALUE_TOLERANCE and all(
        weight >= -PROBABILITY_FLOOR for _, weight in atoms
    )
    return nonneg, minimum, atoms


def critical_power(
    model: ContinuousLoadModel, settings: Optional[SlbSettings] = None
) -> float:
    """Largest P for which the lower bound is achievable.

    Found by bisection on the non-negativity verdict, which is monotone in
    P. Returns `math.inf` when the verdict still holds at
    `max_power_factor` times the mean.
    """
    settings = settings or SlbSettings()
    piecewise = _piecewise(model)
    samples = settings.samples_per_segment

    def nonneg(power):
        return _slb_state(piecewise, power, samples)[0]

    high = piecewise.mean
    cap = settings.max_power_factor * piecewise.mean
    while nonneg(high):
        if high > cap:
            log.warning(
                "Lower bound stays achievable beyond %.6g, reporting an "
                "unbounded critical power", cap,
            )
            return math.inf
        high *= 2.0
    low, _ = bisect_predicate(nonneg, 0.0, high, settings.tolerance)
    return low


def slb_check(
    model: ContinuousLoadModel,
    power: float,
    settings: Optional[SlbSettings] = None,
) -> SlbReport:
    """Evaluate the lower-bound construction at `power`.

    Raises:
        ModelError: Model is not continuous or lacks derivative
            information.

    """
    _check_power(power)
    settings = settings or SlbSettings()
    piecewise = _piecewise(model)
    nonneg, minimum, atoms = _slb_state(
        piecewise, power, settings.samples_per_segment
    )
    total_mass = sum(
        segment.mass()
        + power * (segment.value_at_end() - segment.value_at_start())
        for segment in piecewise.segments
    ) + sum(weight for _, weight in atoms)
    conditional = None
    if nonneg:
        conditional = SlbConditional(piecewise, power, atoms)
    return SlbReport(
        power=float(power),
        continuous_minimum=minimum,
        atoms=atoms,
        nonneg=nonneg,
        critical_power=critical_power(model, settings),
        total_mass=total_mass,
        method="analytic" if piecewise.analytic else "numerical",
        bound=slb_bound(model, power),
        conditional=conditional,
    )
