"""Exception types raised across tvcut"""


class TvcutError(Exception):
    """Base class for every error raised by tvcut"""


class DimensionMismatchError(TvcutError, ValueError):
    """Fields that must share a grid do not"""


class InvalidParameterError(TvcutError, ValueError):
    """A numeric parameter is outside its legal range"""


class DegenerateInputError(TvcutError, ValueError):
    """Input for which the requested quantity is undefined"""


class FieldFormatError(TvcutError, IOError):
    """A field or mask file is malformed or unreadable"""


class ConvergenceError(TvcutError, RuntimeError):
    """Iteration budget exhausted when convergence was required"""


class GridTooLargeError(TvcutError, ValueError):
    """Grid exceeds the size cap of an exhaustive routine"""


class CertificateError(TvcutError, RuntimeError):
    """Max-flow value and min-cut capacity disagree"""
