"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates an operation's preconditions."""


class UnsupportedError(ValueError):
    """The request is outside the supported parameter range (e.g. p < 2 subdifferentials)."""


class ParseError(ValueError):
    """A matrix / subspace / norm-spec file or string could not be parsed."""


class IoError(OSError):
    """File I/O failed; the message carries the offending path."""
