"""Exception hierarchy.

Every error carries the process exit code the command-line front end uses
when the error escapes a command.
"""


class VolsampleError(Exception):
    exit_code = 1


class InvalidInput(VolsampleError, ValueError):
    exit_code = 3


class NonPositiveWeight(InvalidInput):
    pass


class ShapeMismatch(InvalidInput):
    pass


class NonFiniteEntry(InvalidInput):
    pass


class NotPositiveSemidefinite(InvalidInput):
    pass


class IndexOutOfRange(VolsampleError, IndexError):
    exit_code = 4


class SpectrumTooLong(InvalidInput):
    pass


class InvalidGrid(InvalidInput):
    pass


class UnknownStrategy(VolsampleError, ValueError):
    exit_code = 4


class ConvergenceFailure(VolsampleError, ArithmeticError):
    exit_code = 1


class RankDeficient(VolsampleError, ValueError):
    exit_code = 5


class NoNonzeroStart(RankDeficient):
    pass


class CombinatorialBlowup(VolsampleError, ValueError):
    exit_code = 6


class IoError(VolsampleError, OSError):
    exit_code = 2


class ParseError(InvalidInput):
    exit_code = 3
