"""Exception hierarchy shared by all modules."""


class FootInterfaceError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FootInterfaceError):
    pass


class DegenerateGeometry(FootInterfaceError):
    """A guide length collapsed to zero (coincident attachment points)."""


class OutOfDomain(FootInterfaceError):
    """Forward kinematics arcsine argument outside [-1, 1]."""


class SingularDenominator(FootInterfaceError):
    pass


class OutOfWorkspace(FootInterfaceError):
    pass


class EmptySeries(FootInterfaceError):
    pass


class AllStatic(FootInterfaceError):
    """Every sample of a track fell below the velocity threshold."""


class EmptyTrack(FootInterfaceError):
    pass


class TooShort(FootInterfaceError):
    pass


class ConstantChannel(FootInterfaceError):
    def __init__(self, channels):
        self.channels = tuple(int(c) for c in channels)
        super().__init__(f"force channel(s) {', '.join(str(c + 1) for c in self.channels)} carry no variance")


class NonConvergence(FootInterfaceError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class DegenerateWhitening(FootInterfaceError):
    pass


class DegenerateRange(FootInterfaceError):
    pass


class NotDiagonal(FootInterfaceError):
    pass


class AmbiguousSelection(UserWarning):
    """Top two candidate components are nearly equally correlated with the axis profile."""
