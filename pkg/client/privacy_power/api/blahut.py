# -*- coding: utf-8 -*-
"""Privacy-power function of finite discrete loads by Blahut-Arimoto.

The leakage-power trade-off is a rate-distortion problem with the
difference distortion d(x, y) = Σ_i (x_i - y_i), which is infinite unless
y_i <= x_i for every user. Disallowed pairs are excluded structurally
through a log-domain mask. Curve points are found by bisection on the
Lagrange slope of the unconstrained problem.
"""
import functools
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr, logsumexp

from privacy_power.lib import (
    PROBABILITY_FLOOR,
    Unit,
    UnitLike,
    entropy_nats,
    from_nats,
    get_unit,
)
from privacy_power.settings import SolverSettings
from privacy_power.workers import map_in_pool

from .exceptions import (
    AlphabetTooLargeError,
    SolverConvergenceError,
    UnsupportedScenarioError,
)
from .models import (
    BinaryLoadModel,
    DiscreteLoadModel,
    MultiUserModel,
    as_discrete,
    is_discrete,
)
from .results import (
    LEVEL_TOLERANCE,
    CurvePoint,
    Policy,
    PrivacyCurve,
    distortion_matrix,
    feasibility_mask,
)

log = logging.getLogger(__name__)

SOLVER_NAME = "blahut-arimoto"
JOINT_SOLVER_NAME = "blahut-arimoto-joint"
RESTRICTION_CHECK_SIZE = 12

DiscreteSource = Union[DiscreteLoadModel, BinaryLoadModel, MultiUserModel]


@dataclass(frozen=True, eq=False)
class FeasibilityMask:
    """Allowed (x, y) pairs and their distortion.

    Attributes:
        input_levels (np.ndarray): (K, N) input load vectors.
        output_levels (np.ndarray): (M, N) output load vectors.
        allowed (np.ndarray): (K, M) True iff y_i <= x_i for all users.
        distortion (np.ndarray): (K, M) Σ_i (x_i - y_i), +inf when not
            allowed.

    """

    input_levels: np.ndarray
    output_levels: np.ndarray
    allowed: np.ndarray
    distortion: np.ndarray

    @classmethod
    def from_levels(cls, input_levels, output_levels=None):
        input_levels = np.asarray(input_levels, dtype=float)
        if input_levels.ndim == 1:
            input_levels = input_levels[:, None]
        if output_levels is None:
            output_levels = input_levels
        output_levels = np.asarray(output_levels, dtype=float)
        if output_levels.ndim == 1:
            output_levels = output_levels[:, None]
        return cls(
            input_levels,
            output_levels,
            feasibility_mask(input_levels, output_levels),
            distortion_matrix(input_levels, output_levels),
        )

    def output_index(self, levels) -> int:
        """Index of the output vector equal to `levels`."""
        matches = np.all(
            np.abs(self.output_levels - np.asarray(levels)[None, :])
            <= LEVEL_TOLERANCE,
            axis=1,
        )
        if not np.any(matches):
            raise UnsupportedScenarioError(
                f"Output alphabet does not contain {levels}."
            )
        return int(np.argmax(matches))


def product_source(
    model: DiscreteSource, max_size: int = 4096
) -> Tuple[np.ndarray, np.ndarray]:
    """Flattened input pmf and (K, N) level vectors of a discrete source.

    Independent users are combined into their product distribution, a
    joint pmf is used as given.

    Raises:
        AlphabetTooLargeError: Product alphabet exceeds `max_size`.
        UnsupportedScenarioError: A user is not discrete.

    """
    if is_discrete(model):
        model = as_discrete(model)
        return model.pmf.copy(), model.alphabet[:, None].copy()
    if not isinstance(model, MultiUserModel):
        raise UnsupportedScenarioError(
            f"Blahut-Arimoto needs a discrete source, got "
            f"{type(model).__name__}."
        )
    if not model.discrete:
        raise UnsupportedScenarioError(
            "Blahut-Arimoto does not cover continuous users."
        )
    users = [as_discrete(user) for user in model.users]
    size = math.prod(user.size for user in users)
    if size > max_size:
        raise AlphabetTooLargeError(
            f"Product alphabet has {size} vectors, the limit is {max_size}."
        )
    grids = np.meshgrid(*(user.alphabet for user in users), indexing="ij")
    levels = np.stack([grid.ravel() for grid in grids], axis=1)
    if model.joint_pmf is not None:
        pmf = np.asarray(model.joint_pmf, dtype=float).ravel()
    else:
        pmf = functools.reduce(
            np.multiply.outer, (user.pmf for user in users)
        ).ravel()
    return pmf, levels


@dataclass
class _Solution:
    beta: float
    policy: Policy
    power: float
    leakage: float
    log_q: Optional[np.ndarray] = None


class _Problem:
    """Source, mask and the two trivial policies of one curve."""

    def __init__(
        self,
        model: DiscreteSource,
        output_levels=None,
        settings: Optional[SolverSettings] = None,
    ):
        self.settings = settings or SolverSettings()
        pmf, levels = product_source(model, self.settings.max_product_size)
        self.pmf = pmf
        self.mask = FeasibilityMask.from_levels(levels, output_levels)
        self.support = pmf > PROBABILITY_FLOOR
        self.entropy = entropy_nats(pmf)
        self.solver = (
            JOINT_SOLVER_NAME if levels.shape[1] > 1 else SOLVER_NAME
        )
        support_levels = levels[self.support]
        self.identity = self._identity_policy()
        self.constant = Policy(
            levels,
            self.mask.output_levels,
            self._point_mass(support_levels.min(axis=0)),
        )
        self.max_power = max(self.constant.power(pmf), 0.0)
        self.scale = self.max_power

    def _point_mass(self, output) -> np.ndarray:
        matrix = np.zeros(self.mask.allowed.shape)
        matrix[:, self.mask.output_index(output)] = 1.0
        return matrix

    def _identity_policy(self) -> Policy:
        matrix = np.zeros(self.mask.allowed.shape)
        for row, levels in enumerate(self.mask.input_levels):
            matrix[row, self.mask.output_index(levels)] = 1.0
        return Policy(
            self.mask.input_levels, self.mask.output_levels, matrix
        )

    @property
    def degenerate(self) -> bool:
        return self.max_power <= 0.0 or self.entropy <= 0.0

    def solution(self, beta, policy, log_q=None) -> _Solution:
        return _Solution(
            beta,
            policy,
            policy.power(self.pmf),
            policy.leakage(self.pmf, Unit.nats),
            log_q,
        )

    def solve_slope(
        self,
        beta: float,
        tolerance: float,
        max_iterations: int,
        log_q: Optional[np.ndarray] = None,
    ) -> _Solution:
        if math.isinf(beta):
            return self.solution(beta, self.identity)
        if beta <= 0.0:
            return self.solution(0.0, self.constant)
        matrix, log_q = blahut_arimoto(
            self.pmf[self.support],
            self.mask.distortion,
            self.mask.allowed,
            beta,
            tolerance,
            max_iterations,
            support=self.support,
            log_q=log_q,
        )
        policy = Policy(
            self.mask.input_levels, self.mask.output_levels, matrix
        )
        return self.solution(beta, policy, log_q)


def blahut_arimoto(
    pmf: np.ndarray,
    distortion: np.ndarray,
    allowed: np.ndarray,
    beta: float,
    tolerance: float,
    max_iterations: int,
    support: Optional[np.ndarray] = None,
    log_q: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Minimize I(X;Y) + beta * E[d] over the allowed conditionals.

    Args:
        pmf (np.ndarray): Probabilities of the inputs selected by `support`.
        distortion (np.ndarray): (K, M) distortion of all inputs.
        allowed (np.ndarray): (K, M) feasibility mask of all inputs.
        beta (float): Positive multiplier, the negated Lagrange slope.
        tolerance (float): Stop once the upper and lower bounds of the
            Lagrangian differ by less than this (nats).
        max_iterations (int): Iteration cap.
        support (np.ndarray, optional): Boolean row selector of inputs with
            positive probability. All rows when omitted.
        log_q (np.ndarray, optional): Warm start for the log output pmf.

    Returns:
        tuple[np.ndarray, np.ndarray]: (K, M) conditional for every input
            row and the final log output pmf.

    Raises:
        SolverConvergenceError: Bound gap still above `tolerance` after
            `max_iterations` updates.

    """
    if support is None:
        support = np.ones(distortion.shape[0], dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_a_all = np.where(allowed, -beta * distortion, -np.inf)
        log_a = log_a_all[support]
        log_p = np.log(pmf)
        output_size = distortion.shape[1]
        if log_q is None:
            log_q = np.full(output_size, -math.log(output_size))
        gap = math.inf
        for iteration in range(1, max_iterations + 1):
            log_z = logsumexp(log_q[None, :] + log_a, axis=1)
            log_c = logsumexp(
                log_p[:, None] + log_a - log_z[:, None], axis=0
            )
            live = np.isfinite(log_q)
            upper = -float(np.sum(np.exp(log_q[live]) * log_c[live]))
            lower = -float(np.max(log_c))
            gap = upper - lower
            if gap < tolerance:
                break
            log_q = log_q + log_c
            log_q = log_q - logsumexp(log_q)
        else:
            raise SolverConvergenceError(
                f"Blahut-Arimoto did not converge at beta={beta:.6g} after "
                f"{max_iterations} iterations (gap {gap:.3g}).",
                last_iterate=np.exp(log_q),
                gap=gap,
                iterations=max_iterations,
            )
        log.debug(
            "BA beta=%.6g converged in %d iterations (gap %.3g)",
            beta, iteration, gap,
        )
        log_z_all = logsumexp(log_q[None, :] + log_a_all, axis=1)
        matrix = np.exp(log_q[None, :] + log_a_all - log_z_all[:, None])
    # Rows no reachable output covers fall back to the identity.
    broken = ~np.all(np.isfinite(matrix), axis=1)
    for row in np.flatnonzero(broken):
        matrix[row] = 0.0
        cost = np.where(allowed[row], distortion[row], np.inf)
        matrix[row, int(np.argmin(cost))] = 1.0
    matrix = np.where(allowed, matrix, 0.0)
    matrix /= matrix.sum(axis=1, keepdims=True)
    return matrix, log_q


def solve_point(
    model: DiscreteSource,
    slope: float,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    unit: UnitLike = Unit.bits,
    output_levels=None,
    settings: Optional[SolverSettings] = None,
) -> Tuple[Policy, CurvePoint]:
    """Blahut-Arimoto fixed point for one Lagrange slope.

    Args:
        model: Discrete load model, or multi-user model with a joint pmf.
        slope (float): Lagrange slope s <= 0 in nats per energy unit.
            `-math.inf` gives the identity policy, 0 the constant one.
        tol (float, optional): Bound gap tolerance in nats.
        max_iter (int, optional): Iteration cap.
        unit: Unit of the returned leakage.
        output_levels (array, optional): Output alphabet, the input
            alphabet by default.
        settings (SolverSettings, optional): Solver defaults.

    Returns:
        tuple[Policy, CurvePoint]: Achieving policy and its (P, I) point.

    """
    if slope > 0:
        raise ValueError(f"Lagrange slope must be <= 0, got {slope}.")
    settings = settings or SolverSettings()
    problem = _Problem(model, output_levels, settings)
    solution = problem.solve_slope(
        -slope,
        tol or settings.tolerance,
        max_iter or settings.max_iterations,
    )
    point = CurvePoint(
        solution.power,
        from_nats(solution.leakage, unit),
        unit,
        problem.solver,
        slope,
    )
    return solution.policy, point


def _solve_power(
    problem: _Problem,
    target: float,
    tolerance: float,
    max_iterations: int,
) -> _Solution:
    settings = problem.settings
    if problem.degenerate or target >= problem.max_power:
        # requested P is reported, the policy spends max_power of it
        return _Solution(0.0, problem.constant, target, 0.0)
    if target <= 0.0:
        return problem.solution(math.inf, problem.identity)

    def solve(beta, warm=None):
        return problem.solve_slope(
            beta, tolerance, max_iterations, warm.log_q if warm else None
        )

    scale = problem.scale
    hit = settings.power_tolerance * scale
    beta = 1.0 / scale
    current = solve(beta)
    if current.power > target:
        low = current
        high = solve(2.0 * beta, low)
        while high.power > target and high.beta < 1e15 / scale:
            low = high
            high = solve(2.0 * high.beta, low)
    else:
        high = current
        low = solve(0.5 * beta, high)
        while low.power < target:
            if low.beta < 1e-12 / scale:
                low = problem.solution(0.0, problem.constant)
                break
            high = low
            low = solve(0.5 * low.beta, high)

    for step in range(settings.max_bisection_steps):
        for candidate in (low, high):
            if abs(candidate.power - target) <= hit:
                return candidate
        if low.beta > 0.0 and high.beta / low.beta - 1.0 < 1e-12:
            break
        if low.beta > 0.0:
            beta = math.sqrt(low.beta * high.beta)
        else:
            beta = 0.5 * high.beta
        warm = low if low.beta > 0.0 else high
        middle = solve(beta, warm)
        if middle.power > target:
            low = middle
        else:
            high = middle
    log.debug(
        "Power %.6g lies between %.12g and %.12g, mixing bracket policies",
        target, high.power, low.power,
    )
    if low.power - high.power <= 0.0:
        return high
    weight = (target - high.power) / (low.power - high.power)
    weight = min(max(weight, 0.0), 1.0)
    policy = low.policy.mix(high.policy, weight)
    return problem.solution(math.sqrt(max(low.beta, 0.0) * high.beta),
                            policy)


def _check_grid(power_grid) -> np.ndarray:
    grid = np.asarray(list(power_grid), dtype=float)
    if grid.ndim != 1:
        raise ValueError("Power grid must be a flat sequence.")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ValueError("Power grid values must be finite and >= 0.")
    return grid


def solve_curve(
    model: DiscreteSource,
    power_grid: Sequence[float],
    tol: Optional[float] = None,
    unit: UnitLike = Unit.bits,
    output_levels=None,
    settings: Optional[SolverSettings] = None,
    workers: Optional[int] = None,
) -> PrivacyCurve:
    """I(P) on a grid of average AES powers.

    Grid values at or above the perfect-privacy power return I = 0 with the
    constant output policy, P = 0 returns H(X) with the identity policy.
    Saturated points report the requested P: I(P) is a minimum under
    E[X - Y] <= P, and the constant policy spends only the perfect-privacy
    power, which `policy.power(pmf)` returns.
    Interior values bisect the Lagrange slope, mixing the two bracketing
    policies when the target sits on a linear piece of the curve.

    Args:
        model: Discrete load model or multi-user discrete model.
        power_grid (Sequence[float]): Requested powers, each >= 0.
        tol (float, optional): Bound gap tolerance in nats.
        unit: Unit of the leakage values.
        output_levels (array, optional): Output alphabet override.
        settings (SolverSettings, optional): Solver defaults.
        workers (int, optional): Threads used for the grid points.

    Returns:
        PrivacyCurve: One point and policy per requested power.

    """
    settings = settings or SolverSettings()
    unit = get_unit(unit)
    grid = _check_grid(power_grid)
    problem = _Problem(model, output_levels, settings)
    tolerance = tol or settings.tolerance

    def solve(target):
        return _solve_power(
            problem, float(target), tolerance, settings.max_iterations
        )

    solutions = map_in_pool(solve, grid, workers)
    points = []
    for target, solution in zip(grid, solutions):
        multiplier = -solution.beta if solution.beta > 0 else 0.0
        if problem.degenerate or target >= problem.max_power:
            multiplier = 0.0
        power = solution.power
        if target > 0 and abs(power - target) <= 1e-12 * max(1.0, target):
            power = float(target)
        points.append(
            CurvePoint(
                power,
                from_nats(solution.leakage, unit),
                unit,
                problem.solver,
                multiplier,
            )
        )
    return PrivacyCurve(
        tuple(points),
        problem.solver,
        tuple(solution.policy for solution in solutions),
    )


def refined_output_levels(alphabet, refinement: int) -> np.ndarray:
    """Alphabet with `refinement` equally spaced levels inserted in every
    gap of consecutive levels."""
    if refinement < 0:
        raise ValueError("Refinement must be >= 0.")
    alphabet = np.asarray(alphabet, dtype=float)
    if refinement == 0 or alphabet.size < 2:
        return alphabet.copy()
    fractions = np.arange(refinement + 1) / (refinement + 1)
    inner = (
        alphabet[:-1, None]
        + np.diff(alphabet)[:, None] * fractions[None, :]
    ).ravel()
    return np.append(inner, alphabet[-1])


@dataclass(frozen=True)
class AlphabetRestrictionReport:
    power: float
    refinement: int
    restricted: float
    refined: float
    difference: float
    tolerance: float
    passed: bool
    unit: Unit

    def to_dict(self) -> dict:
        return {
            "power": self.power,
            "refinement": self.refinement,
            "restricted": self.restricted,
            "refined": self.refined,
            "difference": self.difference,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "unit": self.unit.value,
        }


def validate_alphabet_restriction(
    model: Union[DiscreteLoadModel, BinaryLoadModel],
    refinement: int,
    power: float,
    tol: float = 1e-6,
    unit: UnitLike = Unit.bits,
    settings: Optional[SolverSettings] = None,
) -> AlphabetRestrictionReport:
    """Compare the optimum on the input alphabet with a refined output
    alphabet at the same power.

    A refined alphabet is a superset of the input alphabet, so its optimum
    can only be lower; the check passes when it is not lower by more than
    `tol`.
    """
    unit = get_unit(unit)
    model = as_discrete(model)
    refined_levels = refined_output_levels(model.alphabet, refinement)
    if refined_levels.size > RESTRICTION_CHECK_SIZE:
        log.warning(
            "Refined output alphabet has %d levels, more than the %d the "
            "check is meant for", refined_levels.size,
            RESTRICTION_CHECK_SIZE,
        )
    restricted = solve_curve(
        model, [power], unit=unit, settings=settings, workers=1
    )[0].leakage
    refined = solve_curve(
        model,
        [power],
        unit=unit,
        output_levels=refined_levels,
        settings=settings,
        workers=1,
    )[0].leakage
    difference = restricted - refined
    return AlphabetRestrictionReport(
        power=float(power),
        refinement=refinement,
        restricted=restricted,
        refined=refined,
        difference=difference,
        tolerance=tol,
        passed=bool(refined >= restricted - tol),
        unit=unit,
    )


def _simplex_grid(parts: int, resolution: int) -> np.ndarray:
    """All vectors of `parts` multiples of 1/resolution summing to one."""
    if parts == 1:
        return np.ones((1, 1))
    bars = np.array(
        list(itertools.combinations(range(resolution + parts - 1),
                                    parts - 1))
    )
    edges = np.concatenate(
        [
            np.full((bars.shape[0], 1), -1),
            bars,
            np.full((bars.shape[0], 1), resolution + parts - 1),
        ],
        axis=1,
    )
    return (np.diff(edges, axis=1) - 1) / resolution


def exhaustive_point(
    model: Union[DiscreteLoadModel, BinaryLoadModel],
    power: float,
    step: float = 1e-2,
    unit: UnitLike = Unit.bits,
) -> CurvePoint:
    """Minimum leakage over a grid of conditional pmfs.

    Every allowed row f(.|x) runs over the simplex grid of resolution
    `step`; the smallest exact I(X;Y) with E[X - Y] <= power is returned.
    Only meant for alphabets of at most three levels.
    """
    model = as_discrete(model)
    if model.size > 3:
        raise UnsupportedScenarioError(
            "Exhaustive search is limited to three load levels."
        )
    resolution = int(round(1.0 / step))
    size = model.size
    alphabet = model.alphabet
    per_row = []
    for row in range(size):
        if model.pmf[row] <= PROBABILITY_FLOOR:
            rows = np.zeros((1, size))
            rows[0, row] = 1.0
        else:
            grid = _simplex_grid(row + 1, resolution)
            rows = np.zeros((grid.shape[0], size))
            rows[:, :row + 1] = grid
        per_row.append(rows)
    indices = np.meshgrid(
        *(np.arange(rows.shape[0]) for rows in per_row), indexing="ij"
    )
    indices = [index.ravel() for index in indices]
    # (candidates, K, M)
    conditionals = np.stack(
        [per_row[row][indices[row]] for row in range(size)], axis=1
    )
    distortion = np.clip(alphabet[:, None] - alphabet[None, :], 0.0, None)
    powers = np.einsum(
        "k,ckm,km->c", model.pmf, conditionals, distortion
    )
    outputs = np.einsum("k,ckm->cm", model.pmf, conditionals)
    leakages = entr(outputs).sum(axis=1) - np.einsum(
        "k,ck->c", model.pmf, entr(conditionals).sum(axis=2)
    )
    feasible = powers <= power + 1e-12
    best = int(np.argmin(np.where(feasible, leakages, np.inf)))
    return CurvePoint(
        float(powers[best]),
        from_nats(max(float(leakages[best]), 0.0), unit),
        unit,
        "exhaustive",
    )
