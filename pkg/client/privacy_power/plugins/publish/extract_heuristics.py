# -*- coding: utf-8 -*-
from privacy_power.api.blahut import solve_curve
from privacy_power.api.heuristics import (
    limit_max_output,
    limit_max_output_bound,
    limit_max_output_clipped,
    time_division,
    time_division_bound,
)
from privacy_power.api.models import as_discrete
from privacy_power.api import plugin


class ExtractHeuristics(plugin.TaskExtractor):
    """Optimal, time-division and limit-max series of one discrete user.

    Rows are `series,k,P,I,unit`; `k` is only set on limit-max rows. A
    non-uniform pmf gets the clipped limit-max extension, labelled as such;
    uniform pmfs also get the `limit-max-bound` closed-form rows.
    """

    label = "Extract Heuristics"
    families = ["heuristics"]
    output_name = "heuristics.csv"

    def process(self, instance):
        context = instance.context
        scenario = context.data["scenario"]
        settings = context.data["settings"]
        unit = context.data["unit"]
        model = as_discrete(context.data["model"].users[0])
        grid = scenario.grid

        rows = []
        optimal = solve_curve(
            model, grid, unit=unit, settings=settings.solver,
            workers=settings.workers,
        )
        rows.extend(
            ("optimal", None, point.power, point.leakage, unit.value)
            for point in optimal
        )
        for power in grid:
            point = time_division(model, power, unit)
            rows.append(
                ("time-division", None, point.power, point.leakage,
                 unit.value)
            )
        for power in grid:
            point = time_division_bound(model, power, unit)
            rows.append(
                ("time-division-bound", None, point.power, point.leakage,
                 unit.value)
            )

        thresholds = scenario.heuristics.thresholds
        if thresholds is None:
            thresholds = range(model.size)
        if model.is_uniform():
            limit_point = limit_max_output
        else:
            self.log.warning(
                "Load pmf is not uniform, writing the clipped limit-max "
                "extension"
            )
            limit_point = limit_max_output_clipped
        for k in thresholds:
            point = limit_point(model, k, unit)
            rows.append(
                (point.solver, k, point.power, point.leakage, unit.value)
            )
        if model.is_uniform():
            for k in thresholds:
                point = limit_max_output_bound(model, k, unit)
                rows.append(
                    (point.solver, k, point.power, point.leakage,
                     unit.value)
                )

        instance.data["optimal"] = optimal
        path = self.output_path(instance)
        plugin.write_csv(path, plugin.HEURISTICS_HEADER, rows)
        self.register_output(instance, path)
