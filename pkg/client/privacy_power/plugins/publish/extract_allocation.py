# -*- coding: utf-8 -*-
from privacy_power.api.dispatch import allocation_series
from privacy_power.api import plugin


class ExtractAllocation(plugin.TaskExtractor):
    """Per-user split of every grid power, written to `allocate.json`."""

    label = "Extract Allocation"
    families = ["allocate"]
    output_name = "allocate.json"

    def process(self, instance):
        context = instance.context
        scenario = context.data["scenario"]
        unit = context.data["unit"]
        allocations = allocation_series(
            context.data["model"],
            scenario.grid,
            unit,
            context.data["settings"],
        )
        instance.data["allocations"] = allocations

        methods = sorted({allocation.method for allocation in allocations})
        data = {
            "unit": unit.value,
            "users": len(context.data["model"]),
            "methods": methods,
            "allocations": [
                allocation.to_dict() for allocation in allocations
            ],
        }
        path = self.output_path(instance)
        plugin.write_json(path, data)
        self.register_output(instance, path)
