import numpy as np


class GSMError(Exception):
    """
    Base class for all errors raised by `gsm_field`.

    The `exit_code` is used by the command line interface to report the failure.
    """
    exit_code = 1


class ParseError(GSMError, ValueError):
    """
    Malformed input file or command line value.

    Parameters
    ----------
    message : str
        description of the problem
    path : str, optional
        file in which the problem occurred
    line : int, optional
        1-based line number at which the problem occurred
    """
    exit_code = 2

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        if path is not None and line is not None:
            message = "{}:{}: {}".format(path, line, message)
        elif path is not None:
            message = "{}: {}".format(path, message)
        super(ParseError, self).__init__(message)


class DimensionMismatch(GSMError, ValueError):
    exit_code = 2


class InvalidRange(GSMError, ValueError):
    exit_code = 2


class InvalidK(GSMError, ValueError):
    exit_code = 2


class ShapeMismatch(GSMError, ValueError):
    exit_code = 2


class NumericalError(GSMError, np.linalg.LinAlgError):
    exit_code = 3


class NotPositiveDefinite(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class CholeskyFailure(NumericalError):
    pass


class UndefinedGradient(NumericalError):
    pass


class DegenerateComponent(NumericalError):
    pass


class TooFewPoints(NumericalError):
    pass


class EmptyModel(GSMError, ValueError):
    exit_code = 4


class InvalidModel(GSMError, ValueError):
    exit_code = 4


class NotSymmetric(GSMError, ValueError):
    exit_code = 2
