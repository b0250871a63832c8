"""Exception and warning types shared across the package."""


class EmclError(Exception):
    """Base class for errors raised by this package."""


class ParseError(EmclError):
    """A file or configuration document failed to parse or validate."""


class ShapeError(EmclError):
    """Operands have inconsistent or unusable dimensions."""


class NumericalError(EmclError):
    """A computation saw non-finite or otherwise unusable values."""


class DeadSubspaceWarning(UserWarning):
    """A subspace received (almost) no responsibility mass or collapsed to zero."""
