"""Exception hierarchy shared by all frobforms modules."""


class FrobformsError(Exception):
    """Base class for all library errors."""


class NotPrime(FrobformsError, ValueError):
    """Field characteristic is not a prime number."""


class OrderTooLarge(FrobformsError, ValueError):
    """Requested field order exceeds the configured desk-scale bound."""


class DivisionByZero(FrobformsError, ZeroDivisionError):
    """Inversion of the zero field element."""


class FieldMismatch(FrobformsError, ValueError):
    """Operands live in different fields."""


class NonResidue(FrobformsError, ArithmeticError):
    """Square root requested for a non-square in odd characteristic.

    Signals the caller to extend the field by degree 2.
    """


class NoRoot(FrobformsError, ArithmeticError):
    """No Artin-Schreier root t with t^2 + t = a (absolute trace is 1).

    Signals the caller to extend the field by degree 2.
    """


class DimensionMismatch(FrobformsError, ValueError):
    """Matrix or vector dimensions are incompatible."""


class Singular(FrobformsError, ArithmeticError):
    """Matrix inversion requested for a singular matrix."""


class NotHomogeneous(FrobformsError, ValueError):
    """Polynomial is not homogeneous."""


class WrongDegree(FrobformsError, ValueError):
    """Polynomial degree does not equal p^e + 1."""


class NotFrobenius(FrobformsError, ValueError):
    """Polynomial contains a monomial not of the shape x_i^q * x_j."""


class DegeneratePattern(FrobformsError, ValueError):
    """Sparse pattern does not use every ambient variable."""


class FullRank(FrobformsError, ValueError):
    """Type a/b classification applies only to sparse matrices of rank < n."""


class UnsupportedDimension(FrobformsError, ValueError):
    """Classification requested beyond five variables."""


class BudgetExceeded(FrobformsError, RuntimeError):
    """Search or enumeration budget exhausted before a definite answer.

    Never silently wrong: carries the best partial result found so far.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PolynomialSyntaxError(FrobformsError, ValueError):
    """Polynomial text failed to parse; carries the offending position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownVariable(PolynomialSyntaxError):
    """Variable outside x1..x9 or beyond the declared variable count."""


class CoefficientParseError(PolynomialSyntaxError):
    """Coefficient text is not a valid element of the coefficient field."""
