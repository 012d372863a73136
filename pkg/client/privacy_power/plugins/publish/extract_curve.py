# -*- coding: utf-8 -*-
from privacy_power.api.dispatch import compute_curve
from privacy_power.api import plugin


class ExtractCurve(plugin.TaskExtractor):
    """Write the privacy-power curve of the scenario to `curve.csv`."""

    label = "Extract Curve"
    families = ["curve"]
    output_name = "curve.csv"

    def process(self, instance):
        context = instance.context
        scenario = context.data["scenario"]
        curve = compute_curve(
            context.data["model"],
            scenario.grid,
            context.data["unit"],
            context.data["settings"],
        )
        instance.data["curve"] = curve

        path = self.output_path(instance)
        plugin.write_csv(path, plugin.CURVE_HEADER, curve.to_rows())
        self.register_output(instance, path)
