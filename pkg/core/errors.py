class MobiManipError(Exception):
    """Base class for every error raised by the simulator."""


class InvalidArgumentError(MobiManipError, ValueError):
    pass


class SingularityError(MobiManipError):
    pass


class DegenerateModelError(MobiManipError):
    pass


class DegenerateDurationError(MobiManipError, ValueError):
    pass


class JointLimitError(MobiManipError, ValueError):
    pass


class DivergedError(MobiManipError):
    """Controller state went non-finite; `log` holds the samples recorded so far."""

    def __init__(self, message: str, log=None):
        super().__init__(message)
        self.log = log


class ConfigError(MobiManipError):
    """Malformed input file; `location` names the line or field at fault."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
