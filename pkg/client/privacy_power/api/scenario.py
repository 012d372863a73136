# -*- coding: utf-8 -*-
"""Scenario documents: JSON schema and conversion into load models."""
import json
import logging
import math
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic import field_validator, model_validator

from privacy_power.lib import Unit
from privacy_power.settings import (
    SimulationSettings,
    ToolkitSettings,
    get_default_settings,
)

from .exceptions import ModelError, ScenarioError
from .models import (
    BinaryLoadModel,
    DiscreteLoadModel,
    ExponentialLoadModel,
    ExponentialSegment,
    MultiUserModel,
    PiecewiseLoadModel,
    PolynomialSegment,
)

log = logging.getLogger(__name__)

TASKS = ("curve", "allocate", "heuristics", "slb", "simulate")
TaskName = Literal["curve", "allocate", "heuristics", "slb", "simulate"]


class ScenarioModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BinaryUser(ScenarioModel):
    kind: Literal["binary"]
    low: float = Field(0.0, ge=0)
    high: float
    p_low: float = Field(ge=0, le=1)

    def build(self):
        return BinaryLoadModel(self.low, self.high, self.p_low)


class ExponentialUser(ScenarioModel):
    kind: Literal["exponential"]
    mean: float = Field(gt=0)

    def build(self):
        return ExponentialLoadModel(self.mean)


class DiscreteUser(ScenarioModel):
    kind: Literal["discrete"]
    alphabet: List[float] = Field(min_length=1)
    pmf: List[float] = Field(min_length=1)

    def build(self):
        return DiscreteLoadModel(self.alphabet, self.pmf)


class UniformUser(ScenarioModel):
    """Uniform pmf on `size` levels `start + k * spacing`."""

    kind: Literal["uniform"]
    size: int = Field(ge=1)
    spacing: float = Field(gt=0)
    start: float = Field(0.0, ge=0)

    def build(self):
        return DiscreteLoadModel.uniform(self.size, self.spacing, self.start)


class PolynomialSegmentSpec(ScenarioModel):
    kind: Literal["polynomial"]
    start: float = Field(ge=0)
    end: float
    coefficients: List[float] = Field(min_length=1)

    def build(self):
        return PolynomialSegment(self.start, self.end, self.coefficients)


class ExponentialSegmentSpec(ScenarioModel):
    """Density `scale * exp(rate * y)`; a missing end means unbounded."""

    kind: Literal["exponential"]
    start: float = Field(ge=0)
    end: Optional[float] = None
    scale: float = Field(ge=0)
    rate: float

    def build(self):
        end = math.inf if self.end is None else self.end
        return ExponentialSegment(self.start, end, self.scale, self.rate)


SegmentSpec = Annotated[
    Union[PolynomialSegmentSpec, ExponentialSegmentSpec],
    Field(discriminator="kind"),
]


class PiecewiseUser(ScenarioModel):
    kind: Literal["piecewise"]
    segments: List[SegmentSpec] = Field(min_length=1)

    def build(self):
        return PiecewiseLoadModel(
            tuple(segment.build() for segment in self.segments)
        )


UserSpec = Annotated[
    Union[BinaryUser, ExponentialUser, DiscreteUser, UniformUser,
          PiecewiseUser],
    Field(discriminator="kind"),
]


class GridRange(ScenarioModel):
    min: float = Field(0.0, ge=0)
    max: float = Field(ge=0)
    steps: int = Field(ge=1)

    @model_validator(mode="after")
    def validate_order(self):
        if self.max < self.min:
            raise ValueError("Grid max is below grid min")
        return self

    def values(self) -> List[float]:
        if self.steps == 1:
            return [self.min]
        return np.linspace(self.min, self.max, self.steps).tolist()


class SimulationSpec(ScenarioModel):
    """Monte-Carlo task parameters.

    `policy` selects what is replayed: the optimal policy at `power`, the
    identity, or one of the heuristics (time division at `power`,
    limit-max-output at `threshold`). Without `power` the middle grid
    value is used. Unset run parameters fall back to the simulation
    settings.
    """

    n: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = Field(None, ge=0, lt=2 ** 64)
    chunk_size: Optional[int] = Field(None, ge=1)
    dump_trace: Optional[bool] = None
    policy: Literal[
        "optimal", "identity", "time_division", "limit_max_output"
    ] = "optimal"
    power: Optional[float] = Field(None, ge=0)
    threshold: Optional[int] = Field(None, ge=0)


class HeuristicsSpec(ScenarioModel):
    """Thresholds k of the limit-max series, all levels when omitted."""

    thresholds: Optional[List[int]] = None


class Scenario(ScenarioModel):
    users: List[UserSpec] = Field(min_length=1)
    joint_pmf: Optional[List[Any]] = None
    power_grid: Union[List[float], GridRange] = Field(
        default_factory=lambda: [0.0]
    )
    unit: Unit = Unit.bits
    tasks: List[TaskName] = Field(default_factory=lambda: ["curve"])
    sim: SimulationSpec = Field(default_factory=SimulationSpec)
    heuristics: HeuristicsSpec = Field(default_factory=HeuristicsSpec)
    settings: ToolkitSettings = Field(default_factory=get_default_settings)

    @field_validator("power_grid")
    @classmethod
    def validate_grid(cls, value):
        values = value.values() if isinstance(value, GridRange) else value
        if not values:
            raise ValueError("Power grid is empty")
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ValueError("Power grid values must be finite and >= 0")
        if any(b < a for a, b in zip(values, values[1:])):
            raise ValueError("Power grid must be sorted")
        return value

    @property
    def grid(self) -> List[float]:
        if isinstance(self.power_grid, GridRange):
            return self.power_grid.values()
        return list(self.power_grid)

    def build_model(self) -> MultiUserModel:
        """Load models of all users.

        Raises:
            ScenarioError: A user or the joint pmf is not a valid model.

        """
        try:
            users = tuple(user.build() for user in self.users)
            joint = None
            if self.joint_pmf is not None:
                joint = np.asarray(self.joint_pmf, dtype=float)
            return MultiUserModel(users, joint)
        except (ModelError, ValueError) as exc:
            raise ScenarioError(f"Invalid load model: {exc}") from exc

    def simulation_settings(self) -> SimulationSettings:
        values = self.settings.simulation.model_dump()
        values.update(self.sim.model_dump(
            include={"n", "seed", "chunk_size", "dump_trace"},
            exclude_none=True,
        ))
        return SimulationSettings(**values)

    def simulation_power(self) -> float:
        if self.sim.power is not None:
            return self.sim.power
        grid = self.grid
        return grid[len(grid) // 2]


def parse_scenario(
    data: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None
) -> Scenario:
    """Validate a scenario document and apply command line overrides.

    Args:
        data (dict): Parsed scenario JSON.
        overrides (dict, optional): `tasks`, `seed` and `unit` replacing
            the document values when not None.

    Raises:
        ScenarioError: Document does not match the schema.

    """
    data = dict(data)
    overrides = overrides or {}
    if overrides.get("tasks") is not None:
        data["tasks"] = list(overrides["tasks"])
    if overrides.get("unit") is not None:
        data["unit"] = overrides["unit"]
    if overrides.get("seed") is not None:
        data["sim"] = dict(data.get("sim") or {}, seed=overrides["seed"])
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        raise ScenarioError(f"Invalid scenario document:\n{exc}") from exc


def load_scenario(
    path: str, overrides: Optional[Dict[str, Any]] = None
) -> Scenario:
    try:
        with open(path, "r") as stream:
            data = json.load(stream)
    except OSError as exc:
        raise ScenarioError(f"Cannot read scenario '{path}': {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"Scenario '{path}' is not JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"Scenario '{path}' must be a JSON object.")
    log.debug("Loaded scenario %s", path)
    return parse_scenario(data, overrides)
