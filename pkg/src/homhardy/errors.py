"""Exception hierarchy shared by every module."""


class HardyError(Exception):
    """Base class for all errors raised by this package."""


class InputError(HardyError, ValueError):
    """Malformed arguments: wrong dimension, non-positive dilation, ..."""


class ConfigError(HardyError, ValueError):
    """An incompatible combination of group, quasi-norm, weights or exponents."""


class ConditionError(HardyError, ValueError):
    """A closed-form formula was asked for outside its validity conditions."""


class DomainError(HardyError, ArithmeticError):
    """A derived quantity (average, norm) is zero or infinite where it must not be."""


class NumericError(HardyError, ArithmeticError):
    """Quadrature failure: non-finite integrand, divergence, or exhausted budget.

    ``partial`` carries the best result obtained before giving up, if any,
    and ``point`` the offending evaluation point for non-finite integrands.
    """

    def __init__(self, message, partial=None, point=None):
        super().__init__(message)
        self.partial = partial
        self.point = point
