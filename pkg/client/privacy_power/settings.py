from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class BaseSettingsModel(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class SolverSettings(BaseSettingsModel):
    tolerance: float = Field(
        1e-9,
        gt=0,
        title="Lagrangian gap tolerance",
        description="Blahut-Arimoto stops once the bound gap (nats) is "
                    "below this value.",
    )
    max_iterations: int = Field(
        100000,
        ge=1,
        title="Maximum iterations",
    )
    power_tolerance: float = Field(
        1e-10,
        gt=0,
        title="Power hit tolerance",
        description="Relative tolerance on the achieved average AES power "
                    "during slope bisection.",
    )
    max_bisection_steps: int = Field(200, ge=1, title="Slope bisection steps")
    max_product_size: int = Field(
        4096,
        ge=1,
        title="Maximum product alphabet",
        description="Largest joint alphabet accepted for correlated users.",
    )
    tabulation_points: int = Field(
        65,
        ge=3,
        title="Tabulation points",
        description="Grid size used when a solved curve feeds the generic "
                    "allocator.",
    )


class AllocatorSettings(BaseSettingsModel):
    tolerance: float = Field(
        1e-10, gt=0, title="Budget tolerance",
        description="Tolerance on the sum of per-user powers.",
    )
    check_points: int = Field(33, ge=3, title="Convexity check points")
    convexity_tolerance: float = Field(1e-7, ge=0, title="Convexity slack")


class SlbSettings(BaseSettingsModel):
    samples_per_segment: int = Field(
        1000,
        ge=1000,
        title="Samples per segment",
        description="Dense sampling floor used when a segment has no "
                    "analytic sign check.",
    )
    tolerance: float = Field(1e-10, gt=0, title="Critical power tolerance")
    max_power_factor: float = Field(
        1e6, gt=1, title="Critical power search cap (x mean)"
    )


class SimulationSettings(BaseSettingsModel):
    n: int = Field(1000000, ge=1, title="Slots")
    seed: int = Field(0, ge=0, lt=2 ** 64, title="Seed")
    chunk_size: int = Field(
        65536,
        ge=1,
        title="Slots per block",
        description="Fixed block size of the per-user random substreams.",
    )
    workers: Optional[int] = Field(None, ge=1, title="Worker threads")
    dump_trace: bool = Field(False, title="Dump trace CSV")


class ToolkitSettings(BaseSettingsModel):
    solver: SolverSettings = Field(
        default_factory=SolverSettings, title="Blahut-Arimoto"
    )
    allocator: AllocatorSettings = Field(
        default_factory=AllocatorSettings, title="Allocator"
    )
    slb: SlbSettings = Field(
        default_factory=SlbSettings, title="Shannon lower bound"
    )
    simulation: SimulationSettings = Field(
        default_factory=SimulationSettings, title="Simulation"
    )
    workers: Optional[int] = Field(
        None, ge=1, title="Grid workers",
        description="Worker threads for curve sweeps. None uses the CPU "
                    "count.",
    )

    @field_validator("workers")
    @classmethod
    def validate_workers(cls, value):
        if value is not None and value > 256:
            raise ValueError("More than 256 grid workers is not supported")
        return value


DEFAULT_VALUES = {
    "solver": {
        "tolerance": 1e-9,
        "max_iterations": 100000,
        "power_tolerance": 1e-10,
        "max_bisection_steps": 200,
        "max_product_size": 4096,
        "tabulation_points": 65,
    },
    "allocator": {
        "tolerance": 1e-10,
        "check_points": 33,
        "convexity_tolerance": 1e-7,
    },
    "slb": {
        "samples_per_segment": 1000,
        "tolerance": 1e-10,
        "max_power_factor": 1e6,
    },
    "simulation": {
        "n": 1000000,
        "seed": 0,
        "chunk_size": 65536,
        "workers": None,
        "dump_trace": False,
    },
    "workers": None,
}


def get_default_settings() -> ToolkitSettings:
    return ToolkitSettings(**DEFAULT_VALUES)
