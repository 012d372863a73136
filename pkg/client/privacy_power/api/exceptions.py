# -*- coding: utf-8 -*-
"""Errors raised by the privacy-power toolkit."""


class PrivacyPowerError(Exception):
    pass


class ModelError(PrivacyPowerError, ValueError):
    """Load model violates one of its invariants."""


class DivergentIntegralError(ModelError):
    pass


class ScenarioError(PrivacyPowerError):
    """Scenario document is invalid or inconsistent."""


class UnsupportedScenarioError(ScenarioError):
    """No solver covers the requested model/task combination."""


class AlphabetTooLargeError(UnsupportedScenarioError):
    pass


class SolverConvergenceError(PrivacyPowerError):
    """Iterative solver did not reach its tolerance.

    Attributes:
        last_iterate (Any): State of the solver at the last iteration.
        gap (float): Bound gap at the last iteration.
        iterations (int): Number of iterations performed.

    """

    def __init__(self, message, last_iterate=None, gap=None, iterations=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.gap = gap
        self.iterations = iterations


class NonConvexCurveError(PrivacyPowerError):
    def __init__(self, message, curve_name=None):
        super().__init__(message)
        self.curve_name = curve_name


class PolicyError(PrivacyPowerError, ValueError):
    """Policy does not fit the load model it is applied to."""


class FeasibilityViolationError(PolicyError):
    pass


class OutputVerificationError(PrivacyPowerError):
    pass
