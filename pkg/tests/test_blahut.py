# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from privacy_power.api.blahut import (
    JOINT_SOLVER_NAME,
    SOLVER_NAME,
    exhaustive_point,
    product_source,
    refined_output_levels,
    solve_curve,
    solve_point,
    validate_alphabet_restriction,
)
from privacy_power.api.closed_forms import binary_leakage
from privacy_power.api.exceptions import (
    AlphabetTooLargeError,
    SolverConvergenceError,
    UnsupportedScenarioError,
)
from privacy_power.api.models import (
    BinaryLoadModel,
    DiscreteLoadModel,
    ExponentialLoadModel,
    MultiUserModel,
)
from privacy_power.settings import SolverSettings


def random_model(rng, max_levels=8):
    size = int(rng.integers(2, max_levels + 1))
    alphabet = np.sort(rng.choice(np.arange(0, 40), size, replace=False))
    pmf = rng.dirichlet(np.ones(size))
    return DiscreteLoadModel(alphabet * 0.25, pmf)


@pytest.mark.parametrize("p_low", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_binary_curve_matches_closed_form(p_low):
    model = BinaryLoadModel(0.0, 1.0, p_low)
    grid = np.linspace(0.0, 1.0, 21)
    curve = solve_curve(model, grid, unit="bits", workers=1)
    for power, point in zip(grid, curve):
        assert point.power == pytest.approx(power, abs=1e-9)
        assert point.leakage == pytest.approx(
            binary_leakage(model, power, "bits"), abs=1e-6
        )
    assert curve.label == SOLVER_NAME


def test_endpoints_are_pinned_for_random_models():
    rng = np.random.default_rng(7)
    for _ in range(50):
        model = random_model(rng)
        maximum = model.perfect_privacy_power
        curve = solve_curve(model, [0.0, maximum], unit="nats", workers=1)
        assert curve[0].leakage == pytest.approx(
            model.entropy("nats"), abs=1e-8
        )
        assert curve[1].leakage == pytest.approx(0.0, abs=1e-8)


def test_curves_are_monotone_and_convex():
    rng = np.random.default_rng(11)
    for _ in range(100):
        model = random_model(rng, max_levels=5)
        grid = np.linspace(0.0, model.perfect_privacy_power, 7)
        curve = solve_curve(model, grid, unit="bits", workers=2)
        assert curve.is_monotone(1e-6)
        assert curve.is_convex(1e-6)


def test_policies_are_feasible_and_meet_power(uniform21):
    curve = solve_curve(uniform21, [0.25, 0.5], unit="bits", workers=1)
    for point, policy in zip(curve, curve.policies):
        levels = policy.input_levels[:, 0]
        outputs = policy.output_levels[:, 0]
        above = outputs[None, :] > levels[:, None]
        assert np.all(policy.matrix[above] == 0.0)
        assert policy.power(uniform21.pmf) == pytest.approx(
            point.power, abs=1e-9
        )
        assert policy.leakage(uniform21.pmf, "bits") == pytest.approx(
            point.leakage, abs=1e-9
        )
        assert policy.output_marginal(uniform21.pmf).sum() == (
            pytest.approx(1.0)
        )


def test_saturated_points_report_the_requested_power(uniform21):
    maximum = uniform21.perfect_privacy_power
    curve = solve_curve(uniform21, [maximum, 1.5 * maximum], workers=1)
    for point, policy in zip(curve, curve.policies):
        assert point.leakage == pytest.approx(0.0, abs=1e-12)
        assert policy.power(uniform21.pmf) == pytest.approx(maximum)
    assert curve[1].power == pytest.approx(1.5 * maximum)
    assert curve[1].multiplier == 0.0


def test_solve_point_trivial_slopes(uniform21):
    policy, point = solve_point(uniform21, -math.inf)
    assert point.leakage == pytest.approx(uniform21.entropy("bits"))
    assert point.power == 0.0
    policy, point = solve_point(uniform21, 0.0)
    assert point.leakage == 0.0
    assert point.power == pytest.approx(1.0)
    with pytest.raises(ValueError):
        solve_point(uniform21, 1.0)


def test_solve_point_trades_power_for_leakage(uniform21):
    _, steep = solve_point(uniform21, -20.0)
    _, flat = solve_point(uniform21, -2.0)
    assert steep.power < flat.power
    assert steep.leakage > flat.leakage
    assert steep.multiplier == -20.0


def test_joint_curve_of_perfectly_correlated_users():
    user = BinaryLoadModel(0.0, 1.0, 0.5)
    joint = MultiUserModel((user, user), [[0.5, 0.0], [0.0, 0.5]])
    grid = [0.0, 0.5, 1.0]
    curve = solve_curve(joint, grid, unit="bits", workers=1)
    assert curve.label == JOINT_SOLVER_NAME
    assert curve[0].leakage == pytest.approx(1.0, abs=1e-8)
    assert curve[2].leakage == pytest.approx(0.0, abs=1e-8)
    # no worse than one user at twice the span
    doubled = BinaryLoadModel(0.0, 2.0, 0.5)
    bound = binary_leakage(doubled, 0.5, "bits")
    assert 0.0 < curve[1].leakage <= bound + 1e-6


def test_independent_product_source(binary_users):
    pmf, levels = product_source(binary_users)
    assert levels.shape == (8, 3)
    assert pmf.sum() == pytest.approx(1.0)
    assert pmf[0] == pytest.approx(0.9 * 0.5 * 0.1)


def test_product_alphabet_cap(uniform21):
    users = MultiUserModel((uniform21, uniform21, uniform21))
    with pytest.raises(AlphabetTooLargeError):
        product_source(users, max_size=4096)
    with pytest.raises(UnsupportedScenarioError):
        product_source(MultiUserModel((ExponentialLoadModel(1.0),)))


def test_refined_output_levels():
    levels = refined_output_levels([0.0, 1.0, 3.0], 1)
    assert levels.tolist() == [0.0, 0.5, 1.0, 2.0, 3.0]


def test_refined_alphabet_never_improves():
    rng = np.random.default_rng(3)
    for _ in range(20):
        model = random_model(rng, max_levels=3)
        power = 0.5 * model.perfect_privacy_power
        for refinement in (1, 2, 3):
            report = validate_alphabet_restriction(
                model, refinement, power, tol=1e-6, unit="bits"
            )
            assert report.passed, report.to_dict()


def test_exhaustive_search_agrees_with_solver():
    model = DiscreteLoadModel([0.0, 1.0, 2.0], [0.2, 0.5, 0.3])
    power = 0.4
    exhaustive = exhaustive_point(model, power, step=0.02, unit="bits")
    solved = solve_curve(model, [power], unit="bits", workers=1)[0]
    assert solved.leakage <= exhaustive.leakage + 1e-6
    assert exhaustive.leakage - solved.leakage < 0.1
    with pytest.raises(UnsupportedScenarioError):
        exhaustive_point(DiscreteLoadModel.uniform(4, 1.0), 0.1)


def test_degenerate_load_has_no_leakage():
    model = DiscreteLoadModel([2.0], [1.0])
    curve = solve_curve(model, [0.0, 1.0], workers=1)
    assert curve.leakages.tolist() == [0.0, 0.0]


def test_tight_iteration_cap_raises():
    settings = SolverSettings(max_iterations=1, tolerance=1e-15)
    with pytest.raises(SolverConvergenceError) as info:
        solve_point(DiscreteLoadModel.uniform(5, 1.0), -1.0,
                    settings=settings)
    assert info.value.iterations == 1
    assert info.value.gap > 0
