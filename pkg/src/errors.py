"""Exceptions raised by the lab"""


class LabError(Exception):
    """Base class for all lab errors"""


class DomainError(LabError, ValueError):
    """Argument outside the domain of an operation"""


class SingularityError(LabError, ArithmeticError):
    """Evaluation at a kernel singularity"""


class AccuracyError(LabError, RuntimeError):
    """Requested tolerance not met

    The best estimate reached is kept on the exception so that callers can
    report it.
    """
    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class FitError(LabError, ValueError):
    """Rejected power-law fit"""


class PropertyViolation(LabError, AssertionError):
    """A checked property failed, the report holds the details"""
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(LabError, ValueError):
    """Invalid run configuration"""
