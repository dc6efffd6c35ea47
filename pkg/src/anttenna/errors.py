"""Exception hierarchy shared by all modules."""


class AntennaError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(AntennaError, ValueError):
    """Input violates a documented invariant.

    ``problems`` holds one message per violated invariant.
    """

    def __init__(self, problems, field=None):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        self.field = field
        super().__init__("; ".join(self.problems))


class SingularSystemError(AntennaError):
    pass


class UnsupportedOperationError(AntennaError):
    pass


class OpenCircuitError(AntennaError):
    pass


class DegeneratePortError(AntennaError):
    pass


class ActivePortError(AntennaError):
    """|gamma| > 1: the port delivers power, which a passive solve cannot do."""


class DegeneratePatternError(AntennaError):
    pass


class OneSidedWidthError(AntennaError):
    pass


class ObjectiveError(AntennaError):
    """Objective failed or broke its contract; ``assignment`` names the culprit."""

    def __init__(self, message, assignment=None):
        self.assignment = assignment
        super().__init__(message if assignment is None
                         else f"{message} (assignment={assignment!r})")


class ConnectivityError(AntennaError):
    pass


class SweepError(AntennaError):
    pass
