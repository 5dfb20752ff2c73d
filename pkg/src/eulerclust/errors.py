"""Exception hierarchy shared by every module in the package."""


class EulerClustError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(EulerClustError, ValueError):
    pass


class InvalidDataError(EulerClustError, ValueError):
    pass


class DataParseError(InvalidDataError):
    """Malformed input file; message carries the row/column location."""


class ShapeError(EulerClustError, ValueError):
    pass


class CapacityError(EulerClustError):
    """An oracle was asked to work on an input larger than its cap."""


class EmptyClusterError(EulerClustError):
    pass


class InvalidPartitionError(EulerClustError, ValueError):
    pass


class InvalidKernelError(EulerClustError, ValueError):
    pass


class DegenerateBoundaryError(EulerClustError, ValueError):
    pass


class ConfigError(EulerClustError):
    """Experiment configuration is inconsistent (CLI exit code 2)."""
