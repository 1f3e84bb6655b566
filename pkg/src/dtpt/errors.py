"""Exception hierarchy.

Validation problems derive from :class:`ValueError` and map to CLI exit
code 2; numerical failures derive from :class:`NumericalError` and map to
exit code 3.
"""


class DTPTError(Exception):
    pass


class ConfigError(DTPTError, ValueError):
    pass


class DimensionMismatch(DTPTError, ValueError):
    pass


class ShapeMismatch(DTPTError, ValueError):
    pass


class NumericalError(DTPTError, ArithmeticError):
    pass


class GapClosed(NumericalError):
    """The Bloch vector touches the origin, so the winding is undefined."""


class NonIntegerWinding(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class EdgeUndefined(NumericalError):
    pass


class DefectiveMatrix(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass


class SignalBelowFloor(NumericalError):
    """Raised when a coupling is too small to take a logarithm of.

    ``nu`` carries the ``+inf`` sentinel reported for the decay exponent.
    """

    def __init__(self, message, nu=float("inf")):
        super().__init__(message)
        self.nu = nu
