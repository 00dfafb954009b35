"""Exception hierarchy shared across the package."""


class FairbidError(Exception):
    """Base class for all errors raised by fairbid."""


class DimensionError(FairbidError, ValueError):
    """An allocation or membership vector has the wrong length."""


class ConfigError(FairbidError, ValueError):
    """A configuration file or parameter is malformed."""


class InvalidDualError(FairbidError, ValueError):
    """Dual variables are outside their admissible range."""


class PreconditionError(FairbidError, ValueError):
    """An operation was called on inputs violating its preconditions."""


class RefusalError(FairbidError):
    """The operation declines to run on this input (too large, wrong structure, ...)."""


class NumericalError(FairbidError):
    """A numerical routine failed to produce a trustworthy answer."""


class HorizonExhausted(FairbidError):
    """The online bidder was asked to act past its time horizon."""
