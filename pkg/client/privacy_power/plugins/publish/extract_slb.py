# -*- coding: utf-8 -*-
from privacy_power.api.allocation import slb_allocate
from privacy_power.api.closed_forms import critical_power, slb_check
from privacy_power.api.models import ContinuousLoadModel, differential_entropy
from privacy_power.api import plugin


class ExtractSlb(plugin.TaskExtractor):
    """Lower-bound reports of the continuous users, into `slb.json`.

    Every continuous user gets its critical power and one report per grid
    power. With several continuous users the waterfilling bound on their
    total leakage is added.
    """

    label = "Extract Shannon Lower Bound"
    families = ["slb"]
    output_name = "slb.json"

    def process(self, instance):
        context = instance.context
        scenario = context.data["scenario"]
        settings = context.data["settings"].slb
        unit = context.data["unit"]
        model = context.data["model"]

        continuous = [
            (index, user) for index, user in enumerate(model.users)
            if isinstance(user, ContinuousLoadModel)
        ]
        users = []
        for index, user in continuous:
            limit = critical_power(user, settings)
            self.log.info("User %d: critical power %.9g", index, limit)
            users.append({
                "user": index,
                "differential_entropy": differential_entropy(user),
                "critical_power": limit,
                "reports": [
                    slb_check(user, power, settings).to_dict()
                    for power in scenario.grid
                ],
            })

        data = {"unit": "nats", "users": users}
        if len(continuous) > 1:
            members = [user for _, user in continuous]
            data["allocation"] = [
                slb_allocate(members, power, unit).to_dict()
                for power in scenario.grid
            ]
        instance.data["slb"] = data

        path = self.output_path(instance)
        plugin.write_json(path, data)
        self.register_output(instance, path)
