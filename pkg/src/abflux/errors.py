"""Exception hierarchy shared by every abflux module."""


class AbfluxError(Exception):
    """Base class for all errors raised by abflux."""

    exit_code = 4


class ConfigError(AbfluxError, ValueError):
    """Invalid configuration or rejected input."""

    exit_code = 2


class AmbiguousRegionError(AbfluxError):
    """Constraint-matrix samples mix zero and nonzero values; refine the region."""

    exit_code = 3


class NumericalError(AbfluxError):
    """Quadrature, eigensolver or internal-consistency failure."""

    exit_code = 4


class DegenerateSystemError(AbfluxError):
    """A quantization entry point was handed a degenerate (blind-area) system."""

    exit_code = 2
