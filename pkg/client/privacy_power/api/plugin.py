# -*- coding: utf-8 -*-
"""Base classes of the task plugins and the output writers they share."""
import csv
import json
import math
import os
from typing import Any, Iterable, List, Sequence

import numpy as np
import pyblish.api

from privacy_power.lib import format_float

CURVE_HEADER = ("P", "I", "unit", "solver")
HEURISTICS_HEADER = ("series", "k", "P", "I", "unit")


def to_jsonable(value: Any) -> Any:
    """Plain JSON value; infinite and nan floats become strings."""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return format_float(value) if not math.isnan(value) else "nan"
    if hasattr(value, "value") and isinstance(value.value, str):
        return value.value
    return value


def write_json(path: str, data: Any):
    with open(path, "w") as stream:
        json.dump(to_jsonable(data), stream, indent=2, allow_nan=False)


def _cell(value) -> str:
    if isinstance(value, float):
        return format_float(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]):
    with open(path, "w", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])


def read_csv(path: str) -> List[dict]:
    with open(path, "r", newline="") as stream:
        return list(csv.DictReader(stream))


class TaskExtractor(pyblish.api.InstancePlugin):
    """Computes one task and writes its output file.

    Subclasses set `families` to their task and `output_name` to the file
    they write into the output directory.
    """

    order = pyblish.api.ExtractorOrder
    output_name = None

    def output_path(self, instance) -> str:
        return os.path.join(
            instance.context.data["outputDir"], self.output_name
        )

    def register_output(self, instance, path: str):
        instance.data.setdefault("outputs", []).append(path)
        instance.context.data.setdefault("outputs", []).append(
            (instance.data["family"], path)
        )
        self.log.info("Written %s", path)
