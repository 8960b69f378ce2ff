"""Exception hierarchy shared across the package.

Two broad families matter for the CLI exit codes: ``DataError`` (bad or
inconsistent inputs) and ``NumericalError`` (computations that cannot
proceed), plus ``ConfigError`` for invalid configuration.
"""


class MahaclassError(Exception):
    pass


class DataError(MahaclassError):
    pass


class NumericalError(MahaclassError):
    pass


class ConfigError(MahaclassError):
    pass


# -- numerical ---------------------------------------------------------------

class NotPositiveDefinite(NumericalError):
    pass


class DimensionMismatch(NumericalError):
    pass


class TooFewSamples(NumericalError):
    pass


class InvalidShape(NumericalError):
    pass


class OutOfDomain(NumericalError):
    pass


class InsufficientSamples(NumericalError):
    pass


class ShapeMismatch(NumericalError):
    pass


class EmptyBatch(NumericalError):
    pass


class ZeroVector(NumericalError):
    pass


class NonFiniteLoss(NumericalError):
    pass


class SingularCovariance(NumericalError):
    pass


class ZeroVariance(NumericalError):
    pass


class SingleClass(NumericalError):
    pass


class LengthMismatch(NumericalError):
    pass


class InsufficientClassData(NumericalError):
    pass


class DegenerateDevSet(NumericalError):
    pass


# -- data --------------------------------------------------------------------

class ParseError(DataError):
    pass


class DuplicateId(DataError):
    pass


class TooSmallForSplit(DataError):
    pass


class VersionMismatch(DataError):
    pass


class InvalidConfig(ConfigError):
    pass
