# -*- coding: utf-8 -*-
import os

import pyblish.api

from privacy_power.api.scenario import load_scenario


class CollectScenario(pyblish.api.ContextPlugin):
    """Load the scenario document and build its load models."""

    order = pyblish.api.CollectorOrder - 0.4
    label = "Collect Scenario"

    def process(self, context):
        path = context.data["scenarioPath"]
        scenario = load_scenario(path, context.data.get("overrides"))
        model = scenario.build_model()

        output_dir = context.data["outputDir"]
        os.makedirs(output_dir, exist_ok=True)

        context.data["scenario"] = scenario
        context.data["model"] = model
        context.data["unit"] = scenario.unit
        context.data["settings"] = scenario.settings
        self.log.info(
            "Scenario %s: %d user(s), %d grid point(s), tasks %s",
            path, len(model), len(scenario.grid), ", ".join(scenario.tasks),
        )
