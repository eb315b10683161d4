"""Exception hierarchy.

Every error carries an ``exit_code`` so the command layer can map it to a
process status without a lookup table: 2 for bad configuration, 3 for
numerical failures.
"""


class RoydenLabError(Exception):
    exit_code = 3


class ConfigError(RoydenLabError):
    exit_code = 2


class OverlapError(ConfigError):
    pass


class ContainmentError(ConfigError):
    pass


class BasePointError(ConfigError):
    pass


class ResolutionError(ConfigError):
    pass


class ManifestError(ConfigError):
    pass


class NumericalError(RoydenLabError):
    exit_code = 3


class ShapeError(NumericalError):
    pass


class DomainError(NumericalError):
    pass


class IllConditionedError(NumericalError):
    pass


class ResidualError(NumericalError):
    pass


class MassError(NumericalError):
    pass


class PeriodMismatchError(NumericalError):
    pass


class SingularMatrixError(NumericalError):
    pass


class NonzeroPeriodError(NumericalError):
    pass


class ZeroAtBasePointError(NumericalError):
    pass


class UnboundedDataError(NumericalError):
    pass


class NonIntegerWindingError(NumericalError):
    pass


class BoundaryZeroError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class ZeroOnBoundaryError(NumericalError):
    pass


class ZeroLocalizationError(NumericalError):
    pass


class AxiomViolation(NumericalError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConvergenceError(NumericalError):
    pass


class RankCollapseError(NumericalError):
    pass


class ExtremalDegenerateError(NumericalError):
    pass


class IoError(RoydenLabError):
    exit_code = 3
