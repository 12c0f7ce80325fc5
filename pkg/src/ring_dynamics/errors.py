"""Exception types shared across the package."""


class DomainError(ValueError):
    """Evaluation requested outside the domain of a potential or orbit formula.

    The message carries the offending coordinates so failures are diagnosable.
    """


class UnboundedOrbitError(ValueError):
    """A Coulomb state with non-negative energy: the motion is unbounded and
    no finite-orbit constants exist."""


class SingularityError(RuntimeError):
    """Numerical integration ran into the ring barrier (or the Coulomb
    center). Carries the last good state and its time."""

    def __init__(self, message, t=None, last_state=None):
        super().__init__(message)
        self.t = t
        self.last_state = last_state


class StepLimitError(RuntimeError):
    """The requested time span needs more steps than the configured cap."""


class ConfigError(ValueError):
    """A scenario/sweep configuration file failed validation."""
