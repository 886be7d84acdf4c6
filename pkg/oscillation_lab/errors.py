"""
errors module
Exception hierarchy shared by every oscillation_lab module.
"""


class OscillationLabError(Exception):
    """
    Base class for all errors raised by oscillation_lab.
    """


class StructuralError(OscillationLabError):
    """
    Exception raised when subsets, functions or families do not belong to the
    same space, or reference indices the space does not have.
    """


class ArgumentError(OscillationLabError):
    """
    Exception raised when a numeric argument is out of range or an operation
    precondition does not hold.
    """


class ResolutionError(OscillationLabError):
    """
    Exception raised when the sample is too coarse for a construction.

    :ivar index: Position of the failing witness, if any.
    :vartype index: int or None
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class InvariantViolation(OscillationLabError):
    """
    Exception raised when an exact invariant fails. Never caught inside the
    library; the CLI turns it into exit code 4.
    """


class DescriptorError(OscillationLabError):
    """
    Exception raised when a JSON descriptor or run configuration is malformed.

    :ivar path: Field path (JMESPath style) of the offending value, if known.
    :vartype path: str or None
    """

    def __init__(self, message: str, path: str | None = None):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
