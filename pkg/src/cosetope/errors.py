"""Exception hierarchy shared by all cosetope modules."""


class CosetopeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CosetopeError):
    """Malformed input: bad modulus, invalid permutation data, unreadable file."""


class ModulusMismatch(ValidationError):
    """Two quotient-mode values with different moduli were combined."""


class PreconditionError(CosetopeError):
    """An operation's stated precondition does not hold for the given data."""


class BudgetError(CosetopeError):
    """A configured resource budget was exceeded; the message names the budget."""
