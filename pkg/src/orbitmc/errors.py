"""Exception types shared across the library."""


class OrbitmcError(Exception):
    """Base class for all library errors."""


class InvalidInputError(OrbitmcError):
    """Input violates a documented precondition."""


class DomainError(OrbitmcError):
    """Operation applied to a value outside its mathematical domain."""


class WrongRegimeError(OrbitmcError):
    """Operation requires a different eigenvalue regime."""


class SpecViolationError(OrbitmcError):
    """A computed eventually-periodic spec disagrees with the exact oracle.

    Raised loudly instead of silently trusting a threshold that was too small.
    """


class InconclusiveError(OrbitmcError):
    """Empirical-mode analysis did not stabilize within the horizon."""


class BoundOverflowError(OrbitmcError):
    """A computed bound is too large to be used as an explicit loop limit."""
