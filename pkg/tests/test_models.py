# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from privacy_power.api.exceptions import ModelError
from privacy_power.api.models import (
    BinaryLoadModel,
    CallableSegment,
    DiscreteLoadModel,
    ExponentialLoadModel,
    ExponentialSegment,
    MultiUserModel,
    PiecewiseLoadModel,
    PolynomialSegment,
    differential_entropy,
    entropy,
    mean,
)


def test_uniform_model_quantities(uniform21):
    assert uniform21.size == 21
    assert uniform21.mean == pytest.approx(1.0)
    assert uniform21.perfect_privacy_power == pytest.approx(1.0)
    assert entropy(uniform21) == pytest.approx(math.log2(21))
    assert uniform21.is_uniform()
    assert uniform21.spacing == pytest.approx(0.1)


def test_perfect_privacy_power_uses_smallest_supported_level():
    model = DiscreteLoadModel([0.0, 1.0, 3.0], [0.0, 0.5, 0.5])
    assert model.min_level == 1.0
    assert model.perfect_privacy_power == pytest.approx(1.0)


@pytest.mark.parametrize("alphabet, pmf", [
    ([1.0, 0.5], [0.5, 0.5]),
    ([0.0, 1.0], [0.6, 0.6]),
    ([-1.0, 1.0], [0.5, 0.5]),
    ([0.0, 1.0], [0.5]),
    ([0.0, 1.0], [1.2, -0.2]),
])
def test_discrete_model_rejects_invalid_input(alphabet, pmf):
    with pytest.raises(ModelError):
        DiscreteLoadModel(alphabet, pmf)


def test_discrete_model_is_immutable(uniform21):
    with pytest.raises(ValueError):
        uniform21.pmf[0] = 1.0


def test_binary_model():
    model = BinaryLoadModel(1.0, 3.0, 0.25)
    assert model.span == 2.0
    assert mean(model) == pytest.approx(2.5)
    assert model.perfect_privacy_power == pytest.approx(1.5)
    assert model.entropy("bits") == pytest.approx(0.811278, abs=1e-6)
    assert BinaryLoadModel(0.0, 1.0, 0.0).perfect_privacy_power == 0.0
    with pytest.raises(ModelError):
        BinaryLoadModel(2.0, 1.0, 0.5)


def test_exponential_model():
    model = ExponentialLoadModel(mean=2.0)
    assert model.mean == 2.0
    assert model == ExponentialLoadModel(2.0)
    assert differential_entropy(model) == pytest.approx(1.0 + math.log(2.0))
    piecewise = model.as_piecewise()
    assert piecewise.mean == pytest.approx(2.0)
    assert piecewise.differential_entropy() == pytest.approx(
        1.0 + math.log(2.0)
    )
    assert piecewise.jumps() == ((0.0, 0.5),)


def test_uniform_density(uniform_density):
    assert uniform_density.mean == pytest.approx(1.0)
    assert differential_entropy(uniform_density) == pytest.approx(
        math.log(2.0)
    )
    assert uniform_density.jumps() == ((0.0, 0.5), (2.0, -0.5))
    assert uniform_density.analytic


def test_triangular_density_entropy():
    model = PiecewiseLoadModel((PolynomialSegment(0.0, 1.0, [0.0, 2.0]),))
    assert model.mean == pytest.approx(2.0 / 3.0)
    assert model.differential_entropy() == pytest.approx(
        0.5 - math.log(2.0), abs=1e-8
    )
    assert model.jumps() == ((1.0, -2.0),)


def test_mixed_segments_jump_at_junction():
    model = PiecewiseLoadModel((
        PolynomialSegment(0.0, 1.0, [0.5]),
        ExponentialSegment(1.0, math.inf, 0.5 * math.e, -1.0),
    ))
    jumps = dict(model.jumps())
    assert jumps[0.0] == pytest.approx(0.5)
    assert 1.0 not in jumps
    assert model.density([0.5, 2.0]) == pytest.approx(
        [0.5, 0.5 * math.exp(-1.0)]
    )


def test_piecewise_model_validation():
    with pytest.raises(ModelError, match="overlap"):
        PiecewiseLoadModel((
            PolynomialSegment(0.0, 1.0, [0.5]),
            PolynomialSegment(0.5, 1.5, [0.5]),
        ))
    with pytest.raises(ModelError, match="integrates"):
        PiecewiseLoadModel((PolynomialSegment(0.0, 1.0, [0.5]),))
    with pytest.raises(ModelError, match="negative"):
        PiecewiseLoadModel((PolynomialSegment(0.0, 1.0, [3.0, -4.0]),))
    with pytest.raises(ModelError):
        ExponentialSegment(0.0, math.inf, 1.0, 0.5)


def test_callable_segment_needs_derivative():
    with pytest.raises(ModelError, match="derivative"):
        CallableSegment(0.0, 1.0, lambda y: np.ones_like(y), None)
    segment = CallableSegment(
        0.0, 1.0, lambda y: np.ones_like(y), lambda y: np.zeros_like(y)
    )
    model = PiecewiseLoadModel((segment,))
    assert not model.analytic
    assert model.differential_entropy() == pytest.approx(0.0, abs=1e-10)


def test_differential_entropy_needs_continuous_model():
    with pytest.raises(ModelError):
        differential_entropy(BinaryLoadModel(0.0, 1.0, 0.5))


def test_joint_pmf_must_reproduce_marginals():
    users = (BinaryLoadModel(0.0, 1.0, 0.5), BinaryLoadModel(0.0, 1.0, 0.5))
    correlated = MultiUserModel(users, [[0.5, 0.0], [0.0, 0.5]])
    assert not correlated.independent
    assert correlated.discrete
    with pytest.raises(ModelError, match="marginal"):
        MultiUserModel(users, [[0.7, 0.0], [0.0, 0.3]])
    with pytest.raises(ModelError, match="shape"):
        MultiUserModel(users, [0.25, 0.25, 0.25, 0.25])


def test_joint_pmf_needs_discrete_users():
    with pytest.raises(ModelError):
        MultiUserModel(
            (ExponentialLoadModel(1.0), BinaryLoadModel(0.0, 1.0, 0.5)),
            [[0.5, 0.5]],
        )
