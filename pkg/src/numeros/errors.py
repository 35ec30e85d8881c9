"""Exception hierarchy shared by every module."""

from __future__ import annotations


class NumerosError(Exception):
    """Base class; ``code`` is the stable module-level error code."""

    code = "NumerosError"


class MalformedAtom(NumerosError, ValueError):
    code = "MalformedAtom"


class ArityMismatch(NumerosError, ValueError):
    code = "ArityMismatch"


class UnsupportedExpression(NumerosError):
    code = "UnsupportedExpression"


class InconsistentCommitment(NumerosError):
    """Raised when the oracle cannot keep its commitments; always a bug."""

    code = "InconsistentCommitment"


class NotDominated(NumerosError):
    code = "NotDominated"


class NotLess(NumerosError):
    code = "NotLess"


class CapacityExceeded(NumerosError):
    """Raised when a witness stage has too few fresh points; always a bug."""

    code = "CapacityExceeded"


class BudgetExceeded(NumerosError):
    code = "BudgetExceeded"


class DSLSyntaxError(NumerosError):
    code = "SyntaxError"

    def __init__(self, line: int, column: int, expected: str, found: str = ""):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        msg = f"line {line}, column {column}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


class UndefinedName(NumerosError):
    code = "UndefinedName"

    def __init__(self, name: str, line: int, column: int):
        self.name = name
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: undefined name {name!r}")
