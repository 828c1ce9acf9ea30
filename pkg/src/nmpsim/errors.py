"""Exception types shared across the simulator."""


class NmpSimError(Exception):
    """Base class for all simulator errors."""


class InvalidModeError(NmpSimError, ValueError):
    """An audio mode has a non-positive sampling rate or frame size."""


class ConfigurationError(NmpSimError):
    """A schedule, ladder or profile is structurally unusable."""


class NoPathError(NmpSimError):
    """A session has no measured candidate path and cannot start."""


class StaleSnapshotError(NmpSimError):
    """A routing decision was asked against a snapshot missing the active path."""


class InvalidPathError(NmpSimError):
    """A reroute names a path that is unknown or already active."""


class ModeMismatchError(NmpSimError):
    """A session mode index is not supported by an endpoint's sound card."""


class FloorViolationError(NmpSimError):
    """A mode change would move a session below its quality floor."""


class ScenarioError(NmpSimError):
    """A scenario document failed validation.

    Carries the complete list of violations; parsing never partially
    succeeds.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
