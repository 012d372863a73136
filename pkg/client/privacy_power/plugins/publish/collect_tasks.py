# -*- coding: utf-8 -*-
import pyblish.api


class CollectTasks(pyblish.api.ContextPlugin):
    """One instance per requested task, the task name being its family."""

    order = pyblish.api.CollectorOrder
    label = "Collect Tasks"

    def process(self, context):
        scenario = context.data.get("scenario")
        if scenario is None:
            self.log.debug("Skipping Collect Tasks, no scenario collected")
            return
        # keep the first occurrence of repeated tasks
        tasks = list(dict.fromkeys(scenario.tasks))
        if not tasks:
            self.log.info("No tasks requested")
            return
        for task in tasks:
            instance = context.create_instance(task, family=task)
            instance.data["families"] = [task]
            instance.data["task"] = task
            self.log.debug("Collected task %s", task)
