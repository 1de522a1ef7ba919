# Error hierarchy; exit codes are what the CLI returns


class EdgeSpecError(Exception):
    """Base error for the toolkit"""

    exit_code = 1

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.context = context


class RejectedInputError(EdgeSpecError):
    """Input violates an operation precondition"""

    exit_code = 2


class HypothesisError(RejectedInputError):
    """Geometric hypothesis of the asymptotics is violated"""


class NumericalError(EdgeSpecError):
    """A numerical procedure failed"""

    exit_code = 3


class EnlargeDomainError(NumericalError):
    """Eigenfunction tail at the truncation boundary is too large"""


class NoMinimumError(NumericalError):
    """Band minimum could not be bracketed"""


class IllPosedError(NumericalError):
    """Shift lies on a non-deflated eigenvalue"""


class ConvergenceError(NumericalError):
    """Iteration did not converge within its budget"""


class AliasingError(NumericalError):
    """Sample grid too coarse for the requested Fourier modes"""
