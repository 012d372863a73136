# -*- coding: utf-8 -*-
import collections
import json
import math
import os

import pyblish.api

from privacy_power.api.exceptions import OutputVerificationError
from privacy_power.api.plugin import read_csv
from privacy_power.api.results import is_midpoint_convex, is_non_increasing
from privacy_power.lib import Unit

# series that are a function of P and must be non-increasing and convex
CURVE_SERIES = ("optimal",)
TOLERANCE = 1e-6


class VerifyOutputs(pyblish.api.ContextPlugin):
    """Re-read the written files and check the curve properties.

    Only active when verification is requested.
    """

    order = pyblish.api.IntegratorOrder
    label = "Verify Outputs"

    def process(self, context):
        if not context.data.get("verify"):
            self.log.debug("Skipping Verify Outputs...")
            return

        errors = []
        for family, path in context.data.get("outputs", []):
            name = os.path.basename(path)
            if name == "curve.csv":
                errors.extend(self.check_curve(path))
            elif name == "heuristics.csv":
                errors.extend(self.check_heuristics(path))
            elif name.endswith(".json"):
                errors.extend(self.check_json(path))
            self.log.debug("Verified %s output %s", family, path)

        if errors:
            bullet_point_errors = "\n".join(
                "- {}".format(err) for err in errors
            )
            raise OutputVerificationError(
                f"Output verification failed.\n\n{bullet_point_errors}"
            )

    @staticmethod
    def check_rows(path, rows):
        errors = []
        units = {unit.value for unit in Unit}
        for number, row in enumerate(rows, start=2):
            if row.get("unit") not in units:
                errors.append(f"{path}:{number} has no valid unit column.")
            try:
                power = float(row["P"])
                leakage = float(row["I"])
            except (KeyError, TypeError, ValueError):
                errors.append(f"{path}:{number} has unreadable P or I.")
                continue
            if power < 0 or leakage < 0 or math.isnan(leakage):
                errors.append(
                    f"{path}:{number} has a negative value "
                    f"(P={power}, I={leakage})."
                )
        return errors

    @staticmethod
    def check_shape(path, label, rows):
        powers = [float(row["P"]) for row in rows]
        leakages = [float(row["I"]) for row in rows]
        errors = []
        if not is_non_increasing(powers, leakages, TOLERANCE):
            errors.append(f"{path}: {label} curve increases with P.")
        if not is_midpoint_convex(powers, leakages, TOLERANCE):
            errors.append(f"{path}: {label} curve is not convex.")
        return errors

    def check_curve(self, path):
        rows = read_csv(path)
        errors = self.check_rows(path, rows)
        if not errors:
            errors.extend(self.check_shape(path, "privacy-power", rows))
        return errors

    def check_heuristics(self, path):
        rows = read_csv(path)
        errors = self.check_rows(path, rows)
        if errors:
            return errors
        series = collections.defaultdict(list)
        for row in rows:
            series[row["series"]].append(row)
        for label in CURVE_SERIES:
            if label in series:
                errors.extend(self.check_shape(path, label, series[label]))
        return errors

    @staticmethod
    def check_json(path):
        try:
            with open(path, "r") as stream:
                data = json.load(stream)
        except (OSError, ValueError) as exc:
            return [f"{path} is not readable JSON: {exc}"]
        errors = []
        for allocation in data.get("allocations", []):
            leakage = allocation.get("total_leakage")
            if leakage != "inf" and float(leakage) < 0:
                errors.append(
                    f"{path}: negative total leakage at "
                    f"P={allocation.get('budget')}."
                )
        return errors
