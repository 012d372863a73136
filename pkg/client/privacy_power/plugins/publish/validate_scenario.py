# -*- coding: utf-8 -*-
import math

import pyblish.api

from privacy_power.api.dispatch import select_curve_solver
from privacy_power.api.exceptions import (
    AlphabetTooLargeError,
    UnsupportedScenarioError,
)
from privacy_power.api.models import (
    ExponentialLoadModel,
    PiecewiseLoadModel,
    as_discrete,
    is_discrete,
)


class ValidateScenario(pyblish.api.InstancePlugin):
    """Ensure every task has a solver for the scenario's load models."""

    order = pyblish.api.ValidatorOrder
    label = "Validate Scenario"
    families = ["curve", "allocate", "heuristics", "slb", "simulate"]

    def process(self, instance):
        context = instance.context
        model = context.data["model"]
        scenario = context.data["scenario"]
        task = instance.data["task"]
        errors = []

        if model.joint_pmf is not None and model.discrete:
            size = math.prod(as_discrete(user).size for user in model.users)
            cap = scenario.settings.solver.max_product_size
            if size > cap:
                raise AlphabetTooLargeError(
                    f"Product alphabet has {size} vectors, the limit is "
                    f"{cap}."
                )

        if task == "curve":
            try:
                solver = select_curve_solver(model)
            except UnsupportedScenarioError as exc:
                errors.append(str(exc))
            else:
                instance.data["solver"] = solver
        elif task == "allocate":
            if model.joint_pmf is not None:
                errors.append(
                    "Allocation needs independent users, the scenario "
                    "has a joint pmf."
                )
            continuous = any(
                isinstance(user, PiecewiseLoadModel) for user in model.users
            )
            if continuous and any(is_discrete(u) for u in model.users):
                errors.append(
                    "Discrete users cannot share an allocation with "
                    "general continuous densities."
                )
        elif task == "heuristics":
            if len(model) != 1 or not model.discrete:
                errors.append(
                    "Heuristics compare policies of a single discrete user."
                )
            else:
                size = as_discrete(model.users[0]).size
                for k in scenario.heuristics.thresholds or []:
                    if k > size - 1:
                        errors.append(
                            f"Threshold k={k} is outside 0..{size - 1}."
                        )
        elif task == "slb":
            if model.discrete:
                errors.append(
                    "The Shannon lower bound needs a continuous user."
                )
        elif task == "simulate":
            errors.extend(self.simulation_errors(model, scenario))

        if errors:
            bullet_point_errors = "\n".join(
                "- {}".format(err) for err in errors
            )
            report = (
                f"Task '{task}' does not fit the scenario.\n\n"
                f"{bullet_point_errors}"
            )
            raise UnsupportedScenarioError(report)

    @staticmethod
    def simulation_errors(model, scenario):
        errors = []
        policy = scenario.sim.policy
        for index, user in enumerate(model.users):
            if isinstance(user, PiecewiseLoadModel):
                errors.append(
                    f"User {index} has a general density, no sampler is "
                    "available."
                )
            elif isinstance(user, ExponentialLoadModel) and (
                policy != "optimal"
            ):
                errors.append(
                    f"User {index} is exponential, only the optimal "
                    "policy can be replayed."
                )
        if policy in ("time_division", "limit_max_output"):
            if len(model) != 1 or not model.discrete:
                errors.append(
                    "Heuristic replay needs a single discrete user."
                )
            elif policy == "limit_max_output":
                threshold = scenario.sim.threshold
                size = as_discrete(model.users[0]).size
                if threshold is None:
                    errors.append("Limit-max-output needs sim.threshold.")
                elif threshold > size - 1:
                    errors.append(
                        f"Threshold k={threshold} is outside "
                        f"0..{size - 1}."
                    )
        return errors
