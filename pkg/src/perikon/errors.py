"""Exception hierarchy shared by the library and the command line."""


class PerikonError(Exception):
    """Base class for all perikon errors."""


class ConfigError(PerikonError, ValueError):
    """Invalid scenario or model configuration."""


class DomainError(PerikonError, ValueError):
    """A physical input lies outside the domain of a closed-form relation."""


class ModelError(PerikonError):
    """The discretized model cannot be evaluated (e.g. an empty horizon)."""


class InstabilityError(PerikonError, RuntimeError):
    """Non-finite state detected during time integration."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class ArrivalNotDetected(PerikonError, RuntimeError):
    """A tracked wave front did not reach its station within the run time."""
