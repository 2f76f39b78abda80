"""Exception hierarchy.

Validation problems (bad scene files, malformed expressions, points outside
the domain) derive from :class:`ValidationError`; numerical breakdowns
(poles, Newton divergence, quadrature failure) derive from
:class:`NumericalError`.  The CLI maps the two families to exit codes 2 and 3.
"""


class AffineLabError(Exception):
    pass


class ValidationError(AffineLabError, ValueError):
    pass


class ExprSyntaxError(ValidationError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name, position):
        super().__init__(f"unknown identifier {name!r}", position)
        self.name = name


class SceneError(ValidationError):
    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class DomainError(ValidationError):
    pass


class JetOrderError(ValidationError):
    pass


class NumericalError(AffineLabError, ArithmeticError):
    pass


class PoleError(NumericalError, ZeroDivisionError):
    pass


class ConvergenceError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class NeighborhoodError(NumericalError):
    """Raised when an implicit solve leaves the region where it is well posed."""


class DegenerateError(NumericalError):
    pass
