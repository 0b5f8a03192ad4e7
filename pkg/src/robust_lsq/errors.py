"""Exception hierarchy shared by every module."""


class RobustLsqError(Exception):
    """Base class for all errors raised by robust_lsq."""


class ContractError(RobustLsqError, ValueError):
    """An input violates an operation's precondition (shape, range, emptiness)."""


class NumericalError(RobustLsqError, ArithmeticError):
    """A solver could not produce a finite answer."""

    def __init__(self, message, batch_id=None):
        super().__init__(message)
        self.batch_id = batch_id


class CapabilityError(RobustLsqError):
    """The request is valid but too large for the exhaustive method asked for."""


class ConfigError(RobustLsqError, ValueError):
    """An experiment or generator configuration is infeasible."""


class DataFormatError(RobustLsqError):
    """A dataset or CSV file could not be parsed."""


class UnsupportedVersionError(DataFormatError):
    """A dataset file declares a format version this build cannot read."""


class DatasetIOError(RobustLsqError, OSError):
    """Reading or writing a dataset file failed at the operating-system level."""
