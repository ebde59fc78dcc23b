"""Exception hierarchy shared by all mixotype modules."""


class MixotypeError(Exception):
    """Base class for every error raised by this package."""


class ExpressionError(MixotypeError):
    """Problem with the text of an expression (reported at parse time)."""

    def __init__(self, message, offset=None, source=None):
        self.offset = offset
        self.source = source
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class ExprSyntaxError(ExpressionError):
    pass


class UnknownIdentifier(ExpressionError):
    pass


class MalformedExponent(ExpressionError):
    pass


class DomainError(MixotypeError, ArithmeticError):
    """Evaluation left the natural domain of an expression.

    ``subexpression`` holds the printed form of the offending node.
    """

    def __init__(self, message, subexpression=None):
        self.subexpression = subexpression
        if subexpression is not None:
            message = f"{message} in '{subexpression}'"
        super().__init__(message)


class SmallCoefficientError(MixotypeError):
    """B vanishes at the point; use ``swap_variables`` and work with C."""


class NotOnTransitionLine(MixotypeError):
    pass


class DegenerateDiagonal(MixotypeError):
    """B and C both vanish on the transition line: V is a multiple of I."""


class PointTypeError(MixotypeError):
    """Operation requested at a point of the wrong type (e.g. hyperbolic)."""


class DegenerateTransitionPoint(MixotypeError):
    """The gradient of the discriminant vanishes at a transition-line point."""


class ConvergenceError(MixotypeError):
    """An iterative solver did not converge; ``residual`` is the last value."""

    def __init__(self, message, residual=None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)


class FitError(MixotypeError):
    pass


class ModelError(MixotypeError):
    """Bad model id, model file or family parameter."""
