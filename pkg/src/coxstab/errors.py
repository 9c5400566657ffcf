"""Shared exception types."""


class CoxstabError(Exception):
    """Base class for all package errors."""


class DiagramError(CoxstabError, ValueError):
    """Invalid diagram source or diagram data.

    Carries the 1-based line/column of the offending token when the error
    came from the text parser.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            message = f"{loc}: {message}"
        super().__init__(message)


class CapExceeded(CoxstabError):
    """An enumeration grew past its configured cap (or failed to close)."""

    def __init__(self, message, cap=None):
        self.cap = cap
        super().__init__(message)


class BudgetExceeded(CoxstabError):
    """A homological computation would exceed its sparse-entry budget."""

    def __init__(self, message, needed=None, budget=None):
        self.needed = needed
        self.budget = budget
        super().__init__(message)


class InfiniteLabelError(CoxstabError):
    """An operation requiring a finite group met an infinite bond label."""


class ReductionBoundExceeded(CoxstabError):
    """Word too long for the guaranteed range of the M-move reducer."""


class SearchBudgetExceeded(CoxstabError):
    """Isomorphism search exceeded its node budget."""
