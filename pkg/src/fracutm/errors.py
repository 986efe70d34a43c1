"""Exception hierarchy. Every error carries a short machine-readable ``reason``."""


class FracUTMError(Exception):
    """Base class; ``reason`` is a stable string for CLI reports."""

    exit_code = 2

    def __init__(self, reason, **info):
        super().__init__(reason)
        self.reason = reason
        self.info = info


class PoleError(FracUTMError):
    pass


class DomainError(FracUTMError):
    pass


class ResolutionError(FracUTMError):
    pass


class BranchCutError(FracUTMError):
    pass


class UnsupportedRangeError(FracUTMError):
    pass


class GeometryError(FracUTMError):
    pass


class DecayViolationError(FracUTMError):
    pass


class ValidationError(FracUTMError):
    pass


class NoValidNuError(FracUTMError):
    pass


class OverflowGuardError(FracUTMError):
    exit_code = 3


class ToleranceNotMetError(FracUTMError):
    exit_code = 3


class NonFiniteIntegrandError(FracUTMError):
    exit_code = 3


class CompatibilityWarning(UserWarning):
    """Initial and boundary data disagree at the corner x = 0, t = 0."""
