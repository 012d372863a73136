# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from privacy_power.api.closed_forms import (
    ExponentialPolicy,
    binary_allocate,
    binary_leakage,
    binary_leakage_curve,
    binary_leakage_derivative,
    binary_policy,
    critical_power,
    exponential_leakage,
    slb_bound,
    slb_check,
)
from privacy_power.api.exceptions import ModelError, PolicyError
from privacy_power.api.models import (
    BinaryLoadModel,
    ExponentialLoadModel,
    PiecewiseLoadModel,
    PolynomialSegment,
)


def test_binary_leakage_reference_value():
    model = BinaryLoadModel(0.0, 1.0, 0.5)
    assert binary_leakage(model, 0.2, "nats") == pytest.approx(
        0.274358, abs=1e-6
    )
    assert binary_leakage(model, 0.2, "bits") == pytest.approx(
        0.39582, abs=1e-5
    )


def test_binary_leakage_endpoints():
    model = BinaryLoadModel(0.0, 2.0, 0.3)
    assert binary_leakage(model, 0.0, "bits") == pytest.approx(
        model.entropy("bits")
    )
    assert binary_leakage(model, 1.4) == 0.0
    assert binary_leakage(model, 5.0) == 0.0
    with pytest.raises(ValueError):
        binary_leakage(model, -0.1)


def test_binary_derivative_matches_finite_difference():
    model = BinaryLoadModel(1.0, 2.5, 0.4)
    power, step = 0.3, 1e-6
    numeric = (
        binary_leakage(model, power + step, "nats")
        - binary_leakage(model, power - step, "nats")
    ) / (2 * step)
    assert binary_leakage_derivative(model, power) == pytest.approx(
        numeric, rel=1e-5
    )
    assert binary_leakage_derivative(model, 0.0) == -math.inf


@pytest.mark.parametrize("power", [0.0, 0.1, 0.25, 0.5, 0.8])
def test_binary_policy_meets_power_and_leakage(power):
    model = BinaryLoadModel(0.0, 1.0, 0.5)
    policy = binary_policy(model, power)
    pmf = [model.p_low, 1.0 - model.p_low]
    assert policy.power(pmf) == pytest.approx(min(power, 0.5))
    assert policy.leakage(pmf, "nats") == pytest.approx(
        binary_leakage(model, power, "nats"), abs=1e-12
    )


def test_binary_curve_is_tagged():
    curve = binary_leakage_curve(
        BinaryLoadModel(0.0, 1.0, 0.2), [0.0, 0.4, 1.0]
    )
    assert curve.label == "closed-form-binary"
    assert curve.leakages[-1] == 0.0
    assert curve.is_monotone()


def test_binary_allocation_saturates_least_likely_high_user_first(
    binary_users,
):
    users = binary_users.users
    allocation = binary_allocate(users, 0.3, "bits")
    assert math.fsum(allocation.per_user) == pytest.approx(0.3, abs=1e-10)
    assert allocation.saturated == (True, False, False)
    assert 0.0 < allocation.level < math.log(10.0)

    full = binary_allocate(users, 1.5, "bits")
    assert full.per_user == pytest.approx((0.1, 0.5, 0.9))
    assert full.total_leakage == 0.0
    assert all(full.saturated)

    none = binary_allocate(users, 0.0, "bits")
    assert none.total_leakage == pytest.approx(
        sum(user.entropy("bits") for user in users)
    )


def test_binary_allocation_equalizes_active_slopes(binary_users):
    allocation = binary_allocate(binary_users.users, 0.6, "nats")
    slopes = [
        binary_leakage_derivative(user, share)
        for user, share, saturated in zip(
            binary_users.users, allocation.per_user, allocation.saturated
        )
        if not saturated
    ]
    assert slopes == pytest.approx([-allocation.level] * len(slopes))


@pytest.mark.parametrize("mean", [0.5, 1.0, 3.0])
def test_exponential_meets_lower_bound(mean):
    model = ExponentialLoadModel(mean)
    for power in np.linspace(0.05, mean, 7):
        assert exponential_leakage(mean, power) == pytest.approx(
            slb_bound(model, power), abs=1e-12
        )
    assert exponential_leakage(mean, 2 * mean) == 0.0
    assert exponential_leakage(mean, 0.0) == math.inf


@pytest.mark.parametrize("mean", [0.5, 2.0])
def test_exponential_critical_power_is_the_mean(mean):
    assert critical_power(ExponentialLoadModel(mean)) == pytest.approx(
        mean, abs=1e-8
    )


def test_uniform_density_lower_bound(uniform_density):
    assert slb_bound(uniform_density, 0.5) == pytest.approx(
        2 * math.log(2.0) - 1.0
    )
    assert slb_bound(uniform_density, 0.0) == math.inf
    # the falling edge at the top of the support leaves a negative atom
    assert critical_power(uniform_density) == pytest.approx(0.0, abs=1e-8)
    report = slb_check(uniform_density, 0.5)
    assert not report.nonneg
    assert report.conditional is None
    assert report.total_mass == pytest.approx(1.0)


def test_slb_check_of_exponential_load():
    report = slb_check(ExponentialLoadModel(2.0), 1.0)
    assert report.nonneg
    assert report.method == "analytic"
    assert report.total_mass == pytest.approx(1.0)
    assert report.atoms == ((0.0, pytest.approx(0.5)),)
    assert report.continuous_minimum >= 0.0
    conditional = report.conditional
    assert conditional is not None
    # conditional mass given x: atom at zero plus the continuous part
    x = 1.5
    ys = np.linspace(0.0, x, 20001)
    continuous = np.trapz(conditional.density(ys, x), ys)
    atoms = sum(weight for _, weight in conditional.atom_probabilities(x))
    assert continuous + atoms == pytest.approx(1.0, abs=1e-4)


def test_rising_density_keeps_bound_up_to_a_critical_power():
    rising = PiecewiseLoadModel((PolynomialSegment(0.0, 1.0, [0.0, 2.0]),))
    report = slb_check(rising, 0.1)
    assert not report.nonneg
    assert report.atoms[-1][1] < 0.0
    with pytest.raises(ModelError):
        slb_bound(BinaryLoadModel(0.0, 1.0, 0.5), 0.1)


def test_exponential_policy():
    policy = ExponentialPolicy(2.0, 0.5)
    assert policy.rate == pytest.approx(1.5)
    assert policy.atom_weight == pytest.approx(0.25)
    ys = np.linspace(1e-9, 60.0, 200001)
    mass = np.trapz(policy.output_density(ys), ys)
    assert mass + policy.atom_weight == pytest.approx(1.0, abs=1e-4)
    rng = np.random.default_rng(5)
    x = rng.exponential(2.0, 200000)
    y = policy.sample(x, rng)
    assert np.all(y <= x)
    assert np.all(y >= 0.0)
    assert np.mean(x - y) == pytest.approx(0.5, rel=0.02)
    assert np.mean(y == 0.0) == pytest.approx(0.25, abs=0.01)


@pytest.mark.parametrize("mean, power", [(1.0, 0.0), (1.0, 1.5), (0.0, 0.1)])
def test_exponential_policy_rejects_bad_arguments(mean, power):
    with pytest.raises(PolicyError):
        ExponentialPolicy(mean, power)


@pytest.mark.parametrize("x", [0.3, 1.0, 4.0])
def test_exponential_policy_conditional_is_a_distribution(x):
    policy = ExponentialPolicy(2.0, 0.5)
    ys = np.linspace(0.0, x, 20001)
    continuous = np.trapz(policy.conditional_density(ys, x), ys)
    assert continuous + policy.atom_probability(x) == pytest.approx(
        1.0, abs=1e-6
    )
    assert policy.conditional_density(x + 0.1, x) == 0.0
