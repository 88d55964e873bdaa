"""Exception hierarchy shared by all modules."""


class RegwaveError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(RegwaveError, ValueError):
    pass


class SamplingError(RegwaveError, RuntimeError):
    pass


class IntegrityError(RegwaveError, RuntimeError):
    """A graph operation would break simplicity or regularity."""


class NumericalError(RegwaveError, ArithmeticError):
    pass


class DomainError(RegwaveError, ValueError):
    pass


class DataError(RegwaveError, ValueError):
    pass
