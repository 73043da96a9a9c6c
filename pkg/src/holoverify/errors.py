"""Exception hierarchy shared by every module."""


class VerificationError(Exception):
    """Base class for all errors raised by holoverify."""


class ParseError(VerificationError, ValueError):
    """Malformed expression text. ``offset`` is a byte offset into the input."""

    def __init__(self, message, offset, text=""):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset
        self.text = text


class EvaluationError(VerificationError, ArithmeticError):
    pass


class SingularityError(EvaluationError):
    """A sample of an integrand or field was non-finite or failed to evaluate.

    ``location`` is a free-form dict (e.g. ``{"t": 0.5, "eps": 0.5}``) naming
    where the offending sample was taken.
    """

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = dict(location or {})


class DifferentiationError(VerificationError):
    pass


class GeometryError(VerificationError, ValueError):
    pass


class ConfigError(VerificationError, ValueError):
    pass


class DegenerateError(VerificationError):
    """A check is undefined at the requested point, e.g. a vanishing derivative."""
