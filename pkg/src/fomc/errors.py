"""Shared exception types."""


class FomcError(Exception):
    """Base class for all library errors."""


class SignatureMismatchError(FomcError):
    """Two structures that must share a signature do not."""


class BudgetExceededError(FomcError):
    """A search or construction exceeded its configured size budget."""


class FormulaError(FomcError):
    """A formula violates a structural requirement (binding, arity, ...)."""


class ParseError(FomcError):
    """Syntax error in a textual structure, shop or formula.

    Carries ``line`` and ``column`` (1-based) when they are known.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
