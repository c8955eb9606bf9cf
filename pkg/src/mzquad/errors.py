"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its documented exit statuses without a lookup table.
"""


class MZQuadError(Exception):
    exit_code = 1


class InputError(MZQuadError, ValueError):
    """Bad geometry or malformed input (exit status 2)."""

    exit_code = 2


class NumericalError(MZQuadError, ArithmeticError):
    """Solver or sampling failure (exit status 3)."""

    exit_code = 3


class DegenerateTriangle(InputError):
    pass


class NotSimple(InputError):
    pass


class BadDegree(InputError):
    pass


class DegreeTooLarge(BadDegree):
    pass


class IndexDegreeMismatch(InputError):
    pass


class PointOnBoundary(InputError):
    pass


class PointOutsidePolygon(InputError):
    pass


class DuplicatePoint(InputError):
    pass


class DegenerateInput(InputError):
    pass


class ParseError(InputError):
    """Expression syntax error at a byte offset of the UTF-8 source."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class IllConditionedCollocation(NumericalError):
    def __init__(self, message, condition=float("inf")):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class NonFiniteSample(NumericalError):
    def __init__(self, point):
        x, y = point
        super().__init__(f"integrand is not finite at ({x!r}, {y!r})")
        self.point = (x, y)


class DegeneratePolynomial(NumericalError):
    pass


class OracleBudgetExceeded(MZQuadError):
    """Adaptive integration stopped before reaching its tolerance.

    The best available value and error estimate travel with the exception.
    """

    exit_code = 4

    def __init__(self, value, error_estimate, message="oracle budget exhausted"):
        super().__init__(f"{message}: value={value!r} +/- {error_estimate:.3e}")
        self.value = value
        self.error_estimate = error_estimate
