# -*- coding: utf-8 -*-
import os

from privacy_power.api.dispatch import identity_policies, optimal_policies
from privacy_power.api.heuristics import HeuristicKind, HeuristicSpec
from privacy_power.api import plugin
from privacy_power.api.simulation import TraceConfig, run


class ExtractSimulation(plugin.TaskExtractor):
    """Replay the selected policy on a seeded trace, into `sim.json`."""

    label = "Extract Simulation"
    families = ["simulate"]
    output_name = "sim.json"

    def process(self, instance):
        context = instance.context
        scenario = context.data["scenario"]
        model = context.data["model"]
        sim = scenario.simulation_settings()
        kind = scenario.sim.policy
        power = scenario.simulation_power()

        policies, joint_policy = (), None
        if kind == "optimal":
            policies, joint_policy = optimal_policies(
                model, power, context.data["settings"]
            )
        elif kind == "identity":
            policies = identity_policies(model)
        elif kind == "time_division":
            policies = (HeuristicSpec(HeuristicKind.time_division,
                                      power=power),)
        else:
            policies = (HeuristicSpec(HeuristicKind.limit_max_output,
                                      threshold=scenario.sim.threshold),)

        trace_path = None
        if sim.dump_trace:
            trace_path = os.path.join(context.data["outputDir"], "trace.csv")
        config = TraceConfig(
            users=model,
            policies=policies,
            n=sim.n,
            seed=sim.seed,
            joint_policy=joint_policy,
            chunk_size=sim.chunk_size,
            workers=sim.workers,
            trace_path=trace_path,
        )
        self.log.info(
            "Replaying %s policy at P=%.6g on %d slots (seed %d)",
            kind, power, sim.n, sim.seed,
        )
        report = run(config)
        instance.data["report"] = report

        data = {
            "policy": kind,
            "power": power if kind in ("optimal", "time_division") else None,
            "threshold": scenario.sim.threshold,
            "report": report.to_dict(),
        }
        path = self.output_path(instance)
        plugin.write_json(path, data)
        self.register_output(instance, path)
        if trace_path:
            self.register_output(instance, trace_path)
