# -*- coding: utf-8 -*-
"""Monte-Carlo replay of memoryless policies on i.i.d. load traces.

Slots are cut into fixed-size blocks. Every (channel, block) pair draws from
its own Philox stream keyed by (seed, user, block), so traces do not depend
on the number of worker threads. Blocks reduce to sufficient statistics
which are summed in block order.
"""
import csv
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr

from privacy_power.lib import Unit, UnitLike, from_nats, get_unit
from privacy_power.workers import Worker, run_workers

from .blahut import product_source
from .closed_forms import ExponentialPolicy
from .exceptions import (
    FeasibilityViolationError,
    PolicyError,
    UnsupportedScenarioError,
)
from .heuristics import HeuristicSpec, heuristic_policy
from .models import (
    ExponentialLoadModel,
    MultiUserModel,
    as_discrete,
    is_discrete,
)
from .results import LEVEL_TOLERANCE, Policy

log = logging.getLogger(__name__)

UserPolicy = Union[Policy, ExponentialPolicy, HeuristicSpec]


@dataclass(frozen=True)
class TraceConfig:
    """Monte-Carlo run description.

    Attributes:
        users (MultiUserModel): Load models.
        policies (tuple): One policy per user, a `Policy` or `HeuristicSpec`
            for discrete users and an `ExponentialPolicy` for exponential
            ones. Ignored when `joint_policy` is given.
        n (int): Number of slots.
        seed (int): 64-bit seed.
        joint_policy (Policy, optional): Policy on the product alphabet of
            discrete users.
        chunk_size (int): Slots per random block.
        workers (int, optional): Worker threads.
        trace_path (str, optional): Write a `slot,user,x,y` CSV here.

    """

    users: MultiUserModel
    policies: Tuple[UserPolicy, ...] = ()
    n: int = 1000000
    seed: int = 0
    joint_policy: Optional[Policy] = None
    chunk_size: int = 65536
    workers: Optional[int] = None
    trace_path: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "policies", tuple(self.policies))
        if self.n < 1:
            raise ValueError("A trace needs at least one slot.")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("Seed must be an unsigned 64-bit integer.")
        if self.chunk_size < 1:
            raise ValueError("Chunk size must be positive.")
        if self.joint_policy is None and (
            len(self.policies) != len(self.users)
        ):
            raise PolicyError(
                f"{len(self.users)} users but {len(self.policies)} "
                "policies."
            )


@dataclass(frozen=True)
class MiEstimate:
    """Plug-in mutual information with its first-order bias term.

    `bias` is (cells_xy - cells_x - cells_y + 1) / (2 n ln 2) bits, the
    expected upward bias of the plug-in estimate, reported but not
    subtracted.
    """

    value: float
    bias: float
    samples: int
    unit: Unit = Unit.bits

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "bias": self.bias,
            "samples": self.samples,
            "unit": self.unit.value,
        }


def _entropy_of_counts(counts: np.ndarray, total: int) -> float:
    return float(entr(counts[counts > 0] / total).sum())


def mi_from_counts(counts, unit: UnitLike = Unit.bits) -> MiEstimate:
    """Plug-in estimate from a (K, M) contingency table."""
    counts = np.asarray(counts, dtype=float)
    total = int(round(counts.sum()))
    if total < 2:
        raise ValueError("Plug-in estimation needs at least 2 samples.")
    row = counts.sum(axis=1)
    column = counts.sum(axis=0)
    value = (
        _entropy_of_counts(row, total)
        + _entropy_of_counts(column, total)
        - _entropy_of_counts(counts.ravel(), total)
    )
    cells = (
        np.count_nonzero(counts)
        - np.count_nonzero(row)
        - np.count_nonzero(column)
        + 1
    )
    unit = get_unit(unit)
    return MiEstimate(
        from_nats(max(value, 0.0), unit),
        from_nats(cells / (2.0 * total), unit),
        total,
        unit,
    )


def estimate_mi_plugin(x, y, unit: UnitLike = Unit.bits) -> MiEstimate:
    """Plug-in I(X;Y) of paired discrete samples.

    Raises:
        ValueError: Fewer than two pairs or mismatched lengths.

    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError("Samples must be paired.")
    if x.shape[0] < 2:
        raise ValueError("Plug-in estimation needs at least 2 samples.")
    _, x_index = np.unique(x, axis=0, return_inverse=True)
    _, y_index = np.unique(y, axis=0, return_inverse=True)
    x_index = x_index.reshape(-1)
    y_index = y_index.reshape(-1)
    width = int(y_index.max()) + 1
    counts = np.bincount(
        x_index * width + y_index,
        minlength=(int(x_index.max()) + 1) * width,
    ).reshape(-1, width)
    return mi_from_counts(counts, unit)


@dataclass
class _BlockStats:
    slots: int
    power_sum: float
    power_squares: float
    violations: int
    counts: Optional[np.ndarray] = None
    moments: Optional[np.ndarray] = None
    trace: Optional[List[Tuple[int, int, float, float]]] = None


class _Channel:
    """Independent source of one or more users."""

    kind = "discrete"

    def __init__(self, users: Sequence[int]):
        self.users = tuple(users)

    @property
    def stream(self) -> int:
        return self.users[0]

    def block(self, rng, size, offset, keep_trace) -> "_BlockStats":
        raise NotImplementedError("Please implement this method!")


class _DiscreteChannel(_Channel):
    def __init__(self, users, pmf, policy: Policy):
        super().__init__(users)
        self.kind = "discrete" if len(self.users) == 1 else "joint"
        self.pmf = np.asarray(pmf, dtype=float)
        self.policy = policy
        self.cdf = np.cumsum(policy.matrix, axis=1)
        self.cdf[:, -1] = 1.0
        self.input_totals = policy.input_levels.sum(axis=1)
        self.output_totals = policy.output_levels.sum(axis=1)

    def sample(self, rng: np.random.Generator, size: int):
        x_index = rng.choice(self.pmf.size, size=size, p=self.pmf)
        uniforms = rng.random(size)
        y_index = np.empty(size, dtype=np.int64)
        for row in np.unique(x_index):
            selected = x_index == row
            y_index[selected] = np.searchsorted(
                self.cdf[row], uniforms[selected], side="right"
            )
        np.minimum(y_index, self.cdf.shape[1] - 1, out=y_index)
        return x_index, y_index

    def block(self, rng, size, offset, keep_trace) -> _BlockStats:
        x_index, y_index = self.sample(rng, size)
        x_levels = self.policy.input_levels[x_index]
        y_levels = self.policy.output_levels[y_index]
        violations = int(
            np.count_nonzero(
                np.any(y_levels > x_levels + LEVEL_TOLERANCE, axis=1)
            )
        )
        power = self.input_totals[x_index] - self.output_totals[y_index]
        width = self.cdf.shape[1]
        counts = np.bincount(
            x_index * width + y_index, minlength=self.pmf.size * width
        ).reshape(self.pmf.size, width)
        trace = None
        if keep_trace:
            trace = [
                (offset + slot, user, float(x_levels[slot, column]),
                 float(y_levels[slot, column]))
                for slot in range(size)
                for column, user in enumerate(self.users)
            ]
        return _BlockStats(
            size,
            float(power.sum()),
            float(np.square(power).sum()),
            violations,
            counts=counts,
            trace=trace,
        )


class _ExponentialChannel(_Channel):
    kind = "exponential"

    def __init__(self, user: int, policy: ExponentialPolicy):
        super().__init__((user,))
        self.policy = policy

    def block(self, rng, size, offset, keep_trace) -> _BlockStats:
        x = rng.exponential(self.policy.mean, size=size)
        y = self.policy.sample(x, rng)
        v = x - y
        violations = int(np.count_nonzero((y > x) | (y < 0)))
        moments = np.array([
            v.sum(),
            np.square(v).sum(),
            y.sum(),
            np.square(y).sum(),
            (v * y).sum(),
            np.count_nonzero(y == 0.0),
        ])
        trace = None
        if keep_trace:
            trace = [
                (offset + slot, self.users[0], float(x[slot]), float(y[slot]))
                for slot in range(size)
            ]
        return _BlockStats(
            size,
            float(moments[0]),
            float(moments[1]),
            violations,
            moments=moments,
            trace=trace,
        )


class _BlockWorker(Worker):
    def __init__(self, channel, config: TraceConfig, block: int):
        self.channel = channel
        self.config = config
        self.block = block
        self.label = f"user {channel.stream} block {block}"

    def execute(self) -> _BlockStats:
        config = self.config
        offset = self.block * config.chunk_size
        size = min(config.chunk_size, config.n - offset)
        rng = np.random.Generator(
            np.random.Philox(
                np.random.SeedSequence(
                    [config.seed, self.channel.stream, self.block]
                )
            )
        )
        return self.channel.block(
            rng, size, offset, config.trace_path is not None
        )


def _user_policy(model, policy) -> Policy:
    if isinstance(policy, HeuristicSpec):
        return heuristic_policy(model, policy)
    if not isinstance(policy, Policy):
        raise PolicyError(
            f"A discrete user needs a conditional pmf, got "
            f"{type(policy).__name__}."
        )
    model = as_discrete(model)
    levels = policy.input_levels
    if (
        levels.shape != (model.size, 1)
        or np.max(np.abs(levels[:, 0] - model.alphabet)) > LEVEL_TOLERANCE
    ):
        raise PolicyError(
            "Policy rows do not match the load alphabet "
            f"({levels.shape[0]} rows for {model.size} levels)."
        )
    return policy


def _product_policy(policies: Sequence[Policy]) -> Policy:
    matrix = functools.reduce(np.kron, (p.matrix for p in policies))

    def product(levels):
        grids = np.meshgrid(*levels, indexing="ij")
        return np.stack([grid.ravel() for grid in grids], axis=1)

    return Policy(
        product([p.input_levels[:, 0] for p in policies]),
        product([p.output_levels[:, 0] for p in policies]),
        matrix,
    )


def _check_joint_rows(policy: Policy, levels: np.ndarray):
    if policy.input_levels.shape != levels.shape or np.max(
        np.abs(policy.input_levels - levels)
    ) > LEVEL_TOLERANCE:
        raise PolicyError(
            "Joint policy rows do not match the product alphabet."
        )


def build_channels(config: TraceConfig) -> List[_Channel]:
    """Independent sampling units of a trace configuration."""
    model = config.users
    users = range(len(model.users))
    if config.joint_policy is not None or model.joint_pmf is not None:
        if not model.discrete:
            raise UnsupportedScenarioError(
                "Joint policies need discrete users only."
            )
        pmf, levels = product_source(model)
        policy = config.joint_policy
        if policy is None:
            policy = _product_policy([
                _user_policy(user, user_policy)
                for user, user_policy in zip(model.users, config.policies)
            ])
        _check_joint_rows(policy, levels)
        return [_DiscreteChannel(users, pmf, policy)]

    channels = []
    for index, (user, policy) in enumerate(
        zip(model.users, config.policies)
    ):
        if is_discrete(user):
            discrete = as_discrete(user)
            channels.append(
                _DiscreteChannel(
                    (index,), discrete.pmf, _user_policy(discrete, policy)
                )
            )
        elif isinstance(user, ExponentialLoadModel):
            if not isinstance(policy, ExponentialPolicy):
                raise PolicyError(
                    f"User {index} is exponential and needs an exponential "
                    "policy."
                )
            if abs(policy.mean - user.mean) > 1e-12 * user.mean:
                raise PolicyError(
                    f"Policy of user {index} is built for mean "
                    f"{policy.mean}, the load has mean {user.mean}."
                )
            channels.append(_ExponentialChannel(index, policy))
        else:
            raise UnsupportedScenarioError(
                f"No sampler for user {index} ({type(user).__name__})."
            )
    return channels


@dataclass(frozen=True)
class UserReport:
    """Statistics of one sampling channel (a user, or all users of a joint
    policy)."""

    users: Tuple[int, ...]
    kind: str
    empirical_power: float
    standard_error: float
    leakage: Optional[MiEstimate] = None
    analytic_power: Optional[float] = None
    analytic_leakage: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "users": list(self.users),
            "kind": self.kind,
            "empirical_power": self.empirical_power,
            "standard_error": self.standard_error,
            "analytic_power": self.analytic_power,
            "leakage": self.leakage.to_dict() if self.leakage else None,
            "analytic_leakage": self.analytic_leakage,
            "diagnostics": dict(self.diagnostics),
        }


@dataclass(frozen=True)
class SimReport:
    """Result of `run`.

    Attributes:
        n (int): Slots simulated.
        seed (int): Seed used.
        empirical_power (float): Mean of Σ_i (X_i - Y_i) per slot.
        standard_error (float): Standard error of `empirical_power`, nan for
            a single slot. It is 0 when Σ_i (X_i - Y_i) takes one value in
            every slot, e.g. identity policies or a degenerate load.
        empirical_leakage (MiEstimate, optional): Sum of the per-channel
            plug-in estimates, absent when a continuous user is present.
        feasibility_violations (int): Slots with Y_i > X_i.
        users (tuple[UserReport]): Per-channel statistics.

    """

    n: int
    seed: int
    empirical_power: float
    standard_error: float
    empirical_leakage: Optional[MiEstimate]
    feasibility_violations: int
    users: Tuple[UserReport, ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "empirical_power": self.empirical_power,
            "standard_error": self.standard_error,
            "empirical_leakage": (
                self.empirical_leakage.to_dict()
                if self.empirical_leakage else None
            ),
            "feasibility_violations": self.feasibility_violations,
            "users": [user.to_dict() for user in self.users],
        }


def _mean_and_error(total, squares, n) -> Tuple[float, float]:
    mean = total / n
    if n < 2:
        return mean, math.nan
    variance = max((squares - n * mean * mean) / (n - 1), 0.0)
    return mean, math.sqrt(variance / n)


def _discrete_report(channel: _DiscreteChannel, blocks, n) -> UserReport:
    counts = sum(block.counts for block in blocks)
    power, error = _mean_and_error(
        math.fsum(block.power_sum for block in blocks),
        math.fsum(block.power_squares for block in blocks),
        n,
    )
    leakage = mi_from_counts(counts) if n >= 2 else None
    return UserReport(
        users=channel.users,
        kind=channel.kind,
        empirical_power=power,
        standard_error=error,
        leakage=leakage,
        analytic_power=channel.policy.power(channel.pmf),
        analytic_leakage=channel.policy.leakage(channel.pmf, Unit.bits),
    )


def _exponential_report(
    channel: _ExponentialChannel, blocks, n
) -> UserReport:
    moments = sum(block.moments for block in blocks)
    v_sum, v_squares, y_sum, y_squares, vy_sum, zeros = moments
    v_mean, v_error = _mean_and_error(v_sum, v_squares, n)
    y_mean = y_sum / n
    v_variance = v_squares / n - v_mean ** 2
    y_variance = y_squares / n - y_mean ** 2
    covariance = vy_sum / n - v_mean * y_mean
    correlation = math.nan
    if v_variance > 0 and y_variance > 0:
        correlation = covariance / math.sqrt(v_variance * y_variance)
    policy = channel.policy
    return UserReport(
        users=channel.users,
        kind=channel.kind,
        empirical_power=v_mean,
        standard_error=v_error,
        analytic_power=policy.power,
        diagnostics={
            "correlation_v_y": correlation,
            "v_mean": v_mean,
            "v_second_moment": v_squares / n,
            "expected_v_second_moment": 2.0 * policy.power ** 2,
            "zero_output_fraction": zeros / n,
            "expected_zero_output_fraction": policy.atom_weight,
        },
    )


def _write_trace(path: str, traces):
    with open(path, "w", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(["slot", "user", "x", "y"])
        for rows in traces:
            writer.writerows(
                (slot, user, repr(x), repr(y)) for slot, user, x, y in rows
            )


def run(config: TraceConfig) -> SimReport:
    """Simulate `config.n` slots and summarize them.

    Raises:
        PolicyError: A policy does not fit its load model.
        FeasibilityViolationError: Some slot had Y_i > X_i.

    """
    channels = build_channels(config)
    blocks = math.ceil(config.n / config.chunk_size)
    jobs = [
        _BlockWorker(channel, config, block)
        for channel in channels
        for block in range(blocks)
    ]
    log.info(
        "Simulating %d slots for %d user(s) in %d block(s)",
        config.n, len(config.users), blocks,
    )
    results = run_workers(jobs, config.workers)
    per_channel = [
        results[index * blocks:(index + 1) * blocks]
        for index in range(len(channels))
    ]

    violations = sum(
        block.violations for stats in per_channel for block in stats
    )
    if violations:
        raise FeasibilityViolationError(
            f"{violations} slot(s) drew a grid load above the demand."
        )
    if config.trace_path:
        _write_trace(
            config.trace_path,
            (block.trace for stats in per_channel for block in stats),
        )
        log.info("Trace written to %s", config.trace_path)

    reports = []
    for channel, stats in zip(channels, per_channel):
        if isinstance(channel, _ExponentialChannel):
            reports.append(_exponential_report(channel, stats, config.n))
        else:
            reports.append(_discrete_report(channel, stats, config.n))

    n = config.n
    power = math.fsum(report.empirical_power for report in reports)
    error = math.sqrt(math.fsum(
        report.standard_error ** 2 for report in reports
    )) if n > 1 else math.nan
    leakage = None
    if all(report.leakage is not None for report in reports):
        leakage = MiEstimate(
            math.fsum(report.leakage.value for report in reports),
            math.fsum(report.leakage.bias for report in reports),
            n,
        )
    return SimReport(
        n=n,
        seed=config.seed,
        empirical_power=power,
        standard_error=error,
        empirical_leakage=leakage,
        feasibility_violations=violations,
        users=tuple(reports),
    )
