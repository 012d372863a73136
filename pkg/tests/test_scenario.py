# -*- coding: utf-8 -*-
import json
import math

import pytest

from privacy_power.api.exceptions import ScenarioError
from privacy_power.api.models import (
    BinaryLoadModel,
    DiscreteLoadModel,
    ExponentialLoadModel,
    PiecewiseLoadModel,
)
from privacy_power.api.scenario import load_scenario, parse_scenario
from privacy_power.lib import Unit


def document(**extra):
    data = {
        "users": [{"kind": "binary", "high": 1.0, "p_low": 0.5}],
        "power_grid": [0.0, 0.25, 0.5],
    }
    data.update(extra)
    return data


def test_defaults():
    scenario = parse_scenario({"users": [{"kind": "exponential",
                                          "mean": 1.0}]})
    assert scenario.tasks == ["curve"]
    assert scenario.grid == [0.0]
    assert scenario.unit is Unit.bits
    assert scenario.settings.solver.tolerance == 1e-9
    assert scenario.sim.policy == "optimal"


def test_all_user_kinds_build():
    scenario = parse_scenario(document(users=[
        {"kind": "binary", "low": 1.0, "high": 2.0, "p_low": 0.3},
        {"kind": "discrete", "alphabet": [0, 1, 2], "pmf": [0.2, 0.5, 0.3]},
        {"kind": "uniform", "size": 4, "spacing": 0.5},
        {"kind": "exponential", "mean": 2.0},
        {"kind": "piecewise", "segments": [
            {"kind": "polynomial", "start": 0, "end": 1,
             "coefficients": [0.5]},
            {"kind": "exponential", "start": 1, "scale": 0.5 * math.e,
             "rate": -1.0},
        ]},
    ]))
    model = scenario.build_model()
    kinds = [type(user) for user in model.users]
    assert kinds == [
        BinaryLoadModel, DiscreteLoadModel, DiscreteLoadModel,
        ExponentialLoadModel, PiecewiseLoadModel,
    ]
    assert model.users[2].mean == pytest.approx(0.75)
    assert model.users[4].mean == pytest.approx(
        model.users[4].as_piecewise().mean
    )


def test_grid_range():
    scenario = parse_scenario(document(
        power_grid={"min": 0.0, "max": 1.0, "steps": 5}
    ))
    assert scenario.grid == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert scenario.simulation_power() == 0.5


@pytest.mark.parametrize("grid", [
    [],
    [0.5, 0.25],
    [-1.0],
    {"min": 1.0, "max": 0.5, "steps": 3},
])
def test_invalid_grids(grid):
    with pytest.raises(ScenarioError):
        parse_scenario(document(power_grid=grid))


@pytest.mark.parametrize("changes", [
    {"users": []},
    {"users": [{"kind": "gamma", "shape": 2.0}]},
    {"tasks": ["plot"]},
    {"unit": "hartleys"},
    {"colour": "blue"},
    {"sim": {"seed": -1}},
    {"settings": {"solver": {"tolerance": 0}}},
])
def test_schema_violations(changes):
    with pytest.raises(ScenarioError, match="Invalid scenario"):
        parse_scenario(document(**changes))


def test_invalid_models_become_scenario_errors():
    scenario = parse_scenario(document(users=[
        {"kind": "discrete", "alphabet": [0, 1], "pmf": [0.7, 0.7]},
    ]))
    with pytest.raises(ScenarioError, match="Invalid load model"):
        scenario.build_model()
    scenario = parse_scenario(document(
        users=[{"kind": "binary", "high": 1.0, "p_low": 0.5}] * 2,
        joint_pmf=[[0.7, 0.0], [0.0, 0.3]],
    ))
    with pytest.raises(ScenarioError):
        scenario.build_model()


def test_joint_pmf_is_kept():
    scenario = parse_scenario(document(
        users=[{"kind": "binary", "high": 1.0, "p_low": 0.5}] * 2,
        joint_pmf=[[0.5, 0.0], [0.0, 0.5]],
    ))
    model = scenario.build_model()
    assert not model.independent


def test_overrides_replace_document_values():
    scenario = parse_scenario(
        document(tasks=["curve"], unit="bits", sim={"n": 10, "seed": 1}),
        {"tasks": ["simulate", "slb"], "seed": 99, "unit": "nats"},
    )
    assert scenario.tasks == ["simulate", "slb"]
    assert scenario.unit is Unit.nats
    assert scenario.sim.seed == 99
    assert scenario.sim.n == 10
    untouched = parse_scenario(
        document(tasks=["curve"]), {"tasks": None, "seed": None}
    )
    assert untouched.tasks == ["curve"]


def test_simulation_settings_merge():
    scenario = parse_scenario(document(
        sim={"n": 500, "dump_trace": True},
        settings={"simulation": {"chunk_size": 100, "seed": 5}},
    ))
    settings = scenario.simulation_settings()
    assert settings.n == 500
    assert settings.chunk_size == 100
    assert settings.seed == 5
    assert settings.dump_trace


def test_load_scenario(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(document()))
    assert len(load_scenario(str(path)).users) == 1

    with pytest.raises(ScenarioError, match="Cannot read"):
        load_scenario(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{users: ")
    with pytest.raises(ScenarioError, match="not JSON"):
        load_scenario(str(broken))
    listed = tmp_path / "list.json"
    listed.write_text("[]")
    with pytest.raises(ScenarioError, match="JSON object"):
        load_scenario(str(listed))
