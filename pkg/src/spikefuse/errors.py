"""Exception hierarchy shared by all spikefuse modules."""


class SpikeFuseError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(SpikeFuseError):
    """A parameter or config file value is out of its legal range."""


class ValidationError(SpikeFuseError):
    """Input data (intensities, spike trains) violates a contract."""


class IngestionError(SpikeFuseError):
    """Raw input (waveform, file on disk) cannot be ingested."""


class StructuralError(SpikeFuseError):
    """Array dimensions or object wiring are inconsistent."""


class NumericError(SpikeFuseError):
    """A numeric quantity is non-finite where finiteness is required."""


class StateError(SpikeFuseError):
    """An operation was invoked before the object reached the required state."""


class FormatError(SpikeFuseError):
    """A file on disk has the wrong magic, version, or layout."""
