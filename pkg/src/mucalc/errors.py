"""Shared exception types."""


class MucalcError(Exception):
    """Base class for all library errors."""


class InputError(MucalcError):
    """Malformed or inconsistent user input (parse errors, bad documents)."""


class BudgetExceededError(MucalcError):
    """An enumeration or search would exceed its configured budget."""


class UnknownVerdictError(MucalcError):
    """A satisfiability query came back UNKNOWN under the fail policy."""
