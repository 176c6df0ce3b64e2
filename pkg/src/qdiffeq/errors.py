"""Exception hierarchy shared by every module of the package."""


class QDiffError(Exception):
    """Base class for all package errors."""


class InvalidConfiguration(QDiffError, ValueError):
    """Raised for an unusable numeric context (e.g. ``|q| <= 1``)."""


class ParseError(QDiffError, ValueError):
    """Syntax error in an operator expression.

    ``position`` is the 0-based character offset where parsing failed.
    """

    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)

    def pointer(self):
        """Two-line rendering of the input with a caret under the error."""
        if self.text is None or self.position is None:
            return str(self)
        return f"{self.text}\n{' ' * self.position}^"


class OperatorError(QDiffError, ValueError):
    """A difference operator violates its structural invariants."""


class ThetaZeroError(QDiffError, ArithmeticError):
    """Evaluation hit a zero of the theta function (z = -q^k)."""


class DivergentProductError(QDiffError, ArithmeticError):
    """Infinite q-Pochhammer product with a base of modulus >= 1."""


class ResonanceError(QDiffError, ArithmeticError):
    """Ambiguous q-power clustering of characteristic roots."""


class RecurrenceError(QDiffError, ArithmeticError):
    """A coefficient recurrence hit an unexpected vanishing denominator."""


class SeriesError(QDiffError, ValueError):
    """Not enough information in a truncated series."""


class TruncationDominated(QDiffError, ArithmeticError):
    """Numeric evaluation of a series is dominated by its truncation tail."""
