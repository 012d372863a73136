# -*- coding: utf-8 -*-
"""Task pipeline: collect the scenario, validate it, extract the outputs."""
import logging
import os
from typing import List, Optional, Sequence, Tuple

import pyblish.api
import pyblish.util

from privacy_power import PRIVACY_POWER_ROOT

log = logging.getLogger(__name__)

HOST = "privacy-power"
PLUGINS_DIR = os.path.join(PRIVACY_POWER_ROOT, "plugins")
PUBLISH_PATH = os.path.join(PLUGINS_DIR, "publish")


def install():
    """Register the task plugins."""
    pyblish.api.register_host(HOST)
    pyblish.api.register_plugin_path(str(PUBLISH_PATH))


def uninstall():
    pyblish.api.deregister_plugin_path(str(PUBLISH_PATH))
    pyblish.api.deregister_host(HOST)


def create_context(
    scenario_path: str,
    output_dir: str,
    tasks: Optional[Sequence[str]] = None,
    seed: Optional[int] = None,
    unit: Optional[str] = None,
    verify: bool = False,
) -> pyblish.api.Context:
    """Context carrying the command line request to the collectors."""
    context = pyblish.api.Context()
    context.data.update({
        "scenarioPath": scenario_path,
        "outputDir": output_dir,
        "overrides": {
            "tasks": list(tasks) if tasks is not None else None,
            "seed": seed,
            "unit": unit,
        },
        "verify": verify,
        "outputs": [],
    })
    return context


def publish(
    context: pyblish.api.Context,
) -> List[Tuple[str, Optional[str], Exception]]:
    """Run all registered plugins on `context`.

    Plugins keep running after an extractor fails; a failed collector or
    validator stops the run before extraction.

    Returns:
        list: (plugin label, instance name, error) of every failure.

    """
    errors = []
    for result in pyblish.util.publish_iter(context):
        error = result.get("error")
        if error is None:
            continue
        plugin = result["plugin"]
        instance = result.get("instance")
        label = plugin.label or plugin.__name__
        name = instance.data.get("name") if instance is not None else None
        errors.append((label, name, error))
    return errors
