"""
Error types for fairkc

Every failure the library raises on purpose derives from FairKCError. The
command line maps these to exit code 2 (bad input); anything else is an
internal failure.
"""


class FairKCError(Exception):
    """Base exception for fairkc input and validation failures"""

    def __init__(self, message, exit_code=2):
        self.message = message
        self.exit_code = exit_code
        super().__init__(message)


class MetricError(FairKCError):
    """Exception raised for invalid metric space construction or queries"""
    pass


class SolverError(FairKCError):
    """Exception raised by the classical k-center solvers"""
    pass


class FairAlgError(FairKCError):
    """Exception raised for invalid fair expansion parameters or inputs"""
    pass


class EvaluationError(FairKCError):
    """Exception raised while scoring ensembles"""
    pass


class InstanceFormatError(FairKCError):
    """Exception raised for malformed instance, dataset or optima files"""
    pass


class ReportError(FairKCError):
    """Exception raised when a report cannot be written or read back"""
    pass
