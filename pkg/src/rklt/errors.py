"""Exception types raised by the library.

All of them derive from ``ValueError`` except :class:`RootBracketingFailure`,
which signals a numerical pathology rather than bad input.
"""


class RootBracketingFailure(ArithmeticError):
    pass


class AlphaOutOfRange(ValueError):
    def __init__(self, message, rho=None):
        super().__init__(message)
        self.rho = rho


class DegenerateTransform(ValueError):
    """Integer matrix with an all-zero row (not invertible)."""


class NotDiagonalizableHere(ValueError):
    pass


class SingularTransform(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class RetainOutOfRange(ValueError):
    pass
