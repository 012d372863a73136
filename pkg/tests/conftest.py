# -*- coding: utf-8 -*-
import os
import sys

import pytest

CLIENT_DIR = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "client"
)
if CLIENT_DIR not in sys.path:
    sys.path.insert(0, CLIENT_DIR)

from privacy_power.api.models import (  # noqa: E402
    BinaryLoadModel,
    DiscreteLoadModel,
    ExponentialLoadModel,
    MultiUserModel,
    PiecewiseLoadModel,
)


@pytest.fixture
def uniform21():
    """21 equally likely levels 0, 0.1, ..., 2.0 with mean 1."""
    return DiscreteLoadModel.uniform(21, 0.1)


@pytest.fixture
def binary_users():
    """Three unit-span binary users with p_low 0.9, 0.5 and 0.1."""
    return MultiUserModel(tuple(
        BinaryLoadModel(0.0, 1.0, p) for p in (0.9, 0.5, 0.1)
    ))


@pytest.fixture
def exponential_users():
    return MultiUserModel(tuple(
        ExponentialLoadModel(mean) for mean in (0.5, 1.0, 2.0)
    ))


@pytest.fixture
def uniform_density():
    return PiecewiseLoadModel.uniform(0.0, 2.0)
