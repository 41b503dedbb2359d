"""Exception hierarchy shared by every horizonlab module."""


class HorizonLabError(Exception):
    """Base class for all errors raised by this package."""


class OutsideWedge(HorizonLabError, ValueError):
    """Event lies on or beyond the Rindler horizon (x <= |ct|)."""


class DegenerateHorizon(HorizonLabError, ValueError):
    """Rindler coordinate chi <= 0 was supplied; the horizon is not a chart point."""


class CoordinateSingularity(HorizonLabError, ValueError):
    """Schwarzschild components requested at or inside r = R."""


class EternalBlackHole(HorizonLabError, ValueError):
    """An evaporation-only quantity was requested for k = 0."""


class ConfigError(HorizonLabError, ValueError):
    """Invalid or conflicting scenario configuration."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericalFailure(HorizonLabError, RuntimeError):
    """Base for integrator failures (CLI exit code 2)."""


class StepUnderflow(NumericalFailure):
    """Adaptive step size fell below the configured floor."""


class MaxStepsExceeded(NumericalFailure):
    """Integrator exhausted its step budget."""
