"""Exception hierarchy. CLI exit codes key off these classes."""


class QesError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(QesError, ValueError):
    """A parameter lies outside the domain of the operation."""


class BranchError(ParameterDomainError):
    """Inadmissible sign branch for a centrifugal coupling."""


class DomainError(ParameterDomainError):
    """Evaluation point outside the physical domain (singular axis, wrong half-plane)."""


class NumericalError(QesError, ArithmeticError):
    """Base for failures of a numerical procedure."""


class ConvergenceError(NumericalError):
    """An iterative method did not converge."""

    def __init__(self, msg, seed=None):
        super().__init__(msg)
        self.seed = seed


class RealnessError(NumericalError):
    """Imaginary parts above tolerance where a real result was expected."""


class NotAnEigenvalueError(NumericalError):
    """Forward recurrence does not truncate for the given separation constant."""


class LabelingError(NumericalError):
    """No eigenstate carries the requested node split."""


class AccuracyError(NumericalError):
    """Error estimate of a quadrature or grid extrapolation exceeds tolerance."""


class NumericDegeneracyError(NumericalError):
    """Division by a quantity that is numerically zero."""
