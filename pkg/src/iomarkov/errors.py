"""Exception hierarchy.

Invalid input derives from :class:`InputError` and failed numerics from
:class:`NumericalError`. The command-line driver maps each base class, as
well as plain ``OSError``, to its own exit code.
"""


class IOMarkovError(Exception):
    """Base class for every error raised by this package."""


class InputError(IOMarkovError, ValueError):
    """The caller supplied data that cannot be analysed."""


class NumericalError(IOMarkovError, ArithmeticError):
    """A numerical procedure failed on otherwise valid input."""


class DimensionMismatch(InputError):
    pass


class ParseError(InputError):
    pass


class ValidationError(InputError):
    pass


class ZeroOutputPole(ValidationError):
    pass


class NotStochastic(InputError):
    pass


class NoAbsorbingState(InputError):
    pass


class NotTransientStart(InputError):
    pass


class InvalidRates(InputError):
    pass


class DegenerateNodes(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class LengthMismatch(InputError):
    pass


class TooFewPoints(InputError):
    pass


class ConstantSeries(InputError):
    pass


class SingularMatrix(NumericalError):
    pass


class NonProductive(NumericalError):
    """The substochastic block has spectral radius 1: no effective final demand."""


class NoConvergence(NumericalError):
    """Power iteration ran out of iterations.

    ``estimate`` holds the last root estimate and ``residual`` its residual.
    """

    def __init__(self, message, estimate=None, residual=None, iterations=None):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual
        self.iterations = iterations
