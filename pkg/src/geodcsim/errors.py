"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator-specific errors."""


class DataFormatError(SimulationError):
    """A file does not match its documented structure (missing columns, bad JSON shape)."""


class DataError(SimulationError):
    """A file parsed but its contents violate an invariant (bad values, gaps, duplicates)."""


class CoverageError(SimulationError):
    """A time-series query fell outside the loaded window."""


class ConfigError(SimulationError):
    """Invalid or inconsistent configuration."""


class ProtocolError(SimulationError):
    """The caller violated the step/reset interface contract."""
