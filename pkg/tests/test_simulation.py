# -*- coding: utf-8 -*-
import csv
import math

import numpy as np
import pytest

from privacy_power.api.closed_forms import (
    ExponentialPolicy,
    binary_leakage,
    binary_policy,
)
from privacy_power.api.exceptions import PolicyError, UnsupportedScenarioError
from privacy_power.api.heuristics import HeuristicSpec
from privacy_power.api.models import (
    BinaryLoadModel,
    DiscreteLoadModel,
    ExponentialLoadModel,
    MultiUserModel,
)
from privacy_power.api.results import Policy
from privacy_power.api.simulation import (
    TraceConfig,
    estimate_mi_plugin,
    mi_from_counts,
    run,
)


def test_binary_optimal_policy_replay():
    model = BinaryLoadModel(0.0, 1.0, 0.5)
    config = TraceConfig(
        MultiUserModel((model,)),
        (binary_policy(model, 0.2),),
        n=200000,
        seed=1,
    )
    report = run(config)
    assert report.feasibility_violations == 0
    assert abs(report.empirical_power - 0.2) < 5 * report.standard_error
    assert report.empirical_leakage.value == pytest.approx(
        binary_leakage(model, 0.2, "bits"), abs=0.01
    )
    user = report.users[0]
    assert user.analytic_power == pytest.approx(0.2)
    assert user.analytic_leakage == pytest.approx(0.39582, abs=1e-5)


def test_traces_do_not_depend_on_worker_count(uniform21):
    def simulate(workers):
        config = TraceConfig(
            MultiUserModel((uniform21, uniform21)),
            (
                HeuristicSpec("time_division", power=0.5),
                HeuristicSpec("limit_max_output", threshold=10),
            ),
            n=10000,
            seed=42,
            chunk_size=1000,
            workers=workers,
        )
        return run(config)

    single = simulate(1)
    pooled = simulate(4)
    assert single.empirical_power == pooled.empirical_power
    assert single.empirical_leakage.value == pooled.empirical_leakage.value
    assert single.to_dict() == pooled.to_dict()


def test_different_seeds_give_different_traces(uniform21):
    def simulate(seed):
        policy = Policy.identity(uniform21.alphabet)
        return run(TraceConfig(
            MultiUserModel((uniform21,)), (policy,), n=2000, seed=seed
        ))

    assert simulate(1).empirical_leakage.value != pytest.approx(
        simulate(2).empirical_leakage.value, abs=1e-12
    )


def test_exponential_policy_diagnostics():
    model = ExponentialLoadModel(2.0)
    config = TraceConfig(
        MultiUserModel((model,)),
        (ExponentialPolicy(2.0, 0.5),),
        n=200000,
        seed=3,
    )
    report = run(config)
    assert report.empirical_leakage is None
    user = report.users[0]
    assert user.kind == "exponential"
    assert user.empirical_power == pytest.approx(0.5, rel=0.02)
    diagnostics = user.diagnostics
    assert abs(diagnostics["correlation_v_y"]) < 0.02
    assert diagnostics["zero_output_fraction"] == pytest.approx(
        0.25, abs=0.01
    )
    assert diagnostics["v_second_moment"] == pytest.approx(
        diagnostics["expected_v_second_moment"], rel=0.05
    )


def test_mixed_users_report_total_power(binary_users):
    users = binary_users.users
    model = MultiUserModel(users + (ExponentialLoadModel(1.0),))
    policies = tuple(binary_policy(user, 0.05) for user in users)
    config = TraceConfig(
        model,
        policies + (ExponentialPolicy(1.0, 0.4),),
        n=50000,
        seed=9,
    )
    report = run(config)
    assert len(report.users) == 4
    assert report.empirical_power == pytest.approx(0.55, abs=0.02)


def test_joint_pmf_replays_product_policy():
    user = BinaryLoadModel(0.0, 1.0, 0.5)
    model = MultiUserModel((user, user), [[0.5, 0.0], [0.0, 0.5]])
    identity = Policy.identity([0.0, 1.0])
    report = run(TraceConfig(model, (identity, identity), n=20000, seed=4))
    assert len(report.users) == 1
    assert report.users[0].kind == "joint"
    assert report.empirical_power == 0.0
    # the pair is perfectly correlated, one bit in total
    assert report.empirical_leakage.value == pytest.approx(1.0, abs=0.01)


def test_policy_mismatches_are_rejected(uniform21):
    model = MultiUserModel((uniform21,))
    with pytest.raises(PolicyError):
        TraceConfig(model, (), n=10)
    wrong = Policy.identity([0.0, 1.0])
    with pytest.raises(PolicyError):
        run(TraceConfig(model, (wrong,), n=10))
    with pytest.raises(PolicyError):
        run(TraceConfig(
            MultiUserModel((ExponentialLoadModel(1.0),)),
            (ExponentialPolicy(2.0, 0.5),),
            n=10,
        ))


def test_continuous_users_without_sampler(uniform_density):
    with pytest.raises(UnsupportedScenarioError):
        run(TraceConfig(
            MultiUserModel((uniform_density,)),
            (ExponentialPolicy(1.0, 0.5),),
            n=10,
        ))


@pytest.mark.parametrize("n, chunk_size", [(0, 10), (10, 0)])
def test_trace_config_validation(uniform21, n, chunk_size):
    with pytest.raises(ValueError):
        TraceConfig(
            MultiUserModel((uniform21,)),
            (Policy.identity(uniform21.alphabet),),
            n=n,
            chunk_size=chunk_size,
        )


def test_trace_dump(tmp_path):
    model = DiscreteLoadModel.uniform(3, 1.0)
    path = tmp_path / "trace.csv"
    run(TraceConfig(
        MultiUserModel((model, model)),
        (Policy.identity(model.alphabet), Policy.identity(model.alphabet)),
        n=5,
        chunk_size=2,
        trace_path=str(path),
    ))
    with open(path, newline="") as stream:
        rows = list(csv.DictReader(stream))
    assert len(rows) == 10
    assert all(row["x"] == row["y"] for row in rows)
    assert {row["user"] for row in rows} == {"0", "1"}


def test_single_slot_has_no_error_estimate(uniform21):
    report = run(TraceConfig(
        MultiUserModel((uniform21,)),
        (Policy.identity(uniform21.alphabet),),
        n=1,
    ))
    assert math.isnan(report.standard_error)
    assert report.empirical_leakage is None


def test_constant_aes_draw_has_zero_error(uniform21):
    report = run(TraceConfig(
        MultiUserModel((uniform21,)),
        (Policy.identity(uniform21.alphabet),),
        n=100,
    ))
    assert report.empirical_power == 0.0
    assert report.standard_error == 0.0


def test_plugin_estimator():
    x = np.repeat([0, 1, 2, 3], 250)
    same = estimate_mi_plugin(x, x, "bits")
    assert same.value == pytest.approx(2.0)
    assert same.samples == 1000
    rng = np.random.default_rng(0)
    noise = estimate_mi_plugin(x, rng.integers(0, 4, 1000))
    assert noise.value < 0.05
    assert noise.bias == pytest.approx(9 / (2 * 1000 * math.log(2)))
    with pytest.raises(ValueError):
        estimate_mi_plugin(x, x[:-1])
    with pytest.raises(ValueError):
        estimate_mi_plugin([1], [1])


def test_mi_from_counts():
    estimate = mi_from_counts([[5, 0], [0, 5]], "nats")
    assert estimate.value == pytest.approx(math.log(2))
    assert estimate.unit.value == "nats"


@pytest.mark.slow
def test_million_slot_replays():
    binary = BinaryLoadModel(0.0, 1.0, 0.5)
    counts = dict(power=0, leakage=0, mean_v=0, correlation=0)
    for seed in range(20):
        report = run(TraceConfig(
            MultiUserModel((binary,)), (binary_policy(binary, 0.2),),
            n=1000000, seed=seed,
        ))
        counts["power"] += abs(report.empirical_power - 0.2) <= 0.002
        counts["leakage"] += abs(
            report.empirical_leakage.value - 0.39581
        ) <= 0.005

        report = run(TraceConfig(
            MultiUserModel((ExponentialLoadModel(1.0),)),
            (ExponentialPolicy(1.0, 0.5),),
            n=1000000, seed=seed,
        ))
        user = report.users[0]
        counts["mean_v"] += abs(user.empirical_power - 0.5) <= 0.0015
        counts["correlation"] += abs(
            user.diagnostics["correlation_v_y"]
        ) <= 0.01
    for name, passed in counts.items():
        assert passed >= 19, (name, passed)


@pytest.mark.slow
def test_plugin_leakage_converges_with_trace_length():
    model = BinaryLoadModel(0.0, 1.0, 0.5)
    policy = binary_policy(model, 0.2)
    analytic = binary_leakage(model, 0.2, "bits")
    consistent = 0
    for seed in range(20):
        errors = [
            abs(run(TraceConfig(
                MultiUserModel((model,)), (policy,), n=n, seed=seed,
            )).empirical_leakage.value - analytic)
            for n in (1000, 10000, 100000, 1000000)
        ]
        steps = sum(
            later <= earlier for earlier, later in zip(errors, errors[1:])
        )
        consistent += steps >= 2
    assert consistent > 10
