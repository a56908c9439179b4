class MsnetError(Exception):
    """Base class for all library errors."""


class ValidationError(MsnetError, ValueError):
    pass


class Unstable(MsnetError):
    """The saturation constant is not below the mean inter-arrival time."""


class UnstableInput(Unstable):
    pass


class NoSignChange(MsnetError):
    def __init__(self, message, theta_max=None):
        super().__init__(message)
        self.theta_max = theta_max


class DegenerateInput(MsnetError):
    pass


class HorizonExceeded(MsnetError):
    pass


class BatchTooSmall(MsnetError):
    pass


class InsufficientTail(MsnetError):
    pass


class MissingArtifacts(MsnetError):
    pass
