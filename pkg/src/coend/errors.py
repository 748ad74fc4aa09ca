"""Exception types shared across the package."""


class CoendError(Exception):
    """Base class for all errors raised by this package."""


class DomainMismatch(CoendError, ValueError):
    pass


class InvalidFunction(CoendError, ValueError):
    pass


class BoundTooSmall(CoendError, ValueError):
    pass


class SearchTooLarge(CoendError, RuntimeError):
    pass


class LanguageMismatch(CoendError, ValueError):
    pass


class NullarySymbolError(CoendError, ValueError):
    pass


class FunctorError(CoendError, ValueError):
    """A functor table is malformed or violates functoriality."""


class LoadError(CoendError, ValueError):
    """A JSON input could not be parsed; carries a position when known."""

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}:{column}"
            where += ": "
        super().__init__(where + message)


class FormulaError(CoendError, ValueError):
    pass


class PreconditionError(CoendError, ValueError):
    pass


class ExpressionParseError(CoendError, ValueError):
    """A black-box output could not be read as an expression of X (x) F."""
