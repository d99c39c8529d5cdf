"""Exception hierarchy shared by all modules."""


class SkinDepthError(Exception):
    """Base class for errors raised by skindepth."""


class DomainError(SkinDepthError, ValueError):
    """Argument outside the mathematical or physical domain of a function."""


class NotFoundError(SkinDepthError, KeyError):
    """Unknown preset or named entity."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ParseError(SkinDepthError, ValueError):
    """Malformed input file; carries the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BranchCutError(DomainError):
    """A complex logarithm argument landed on its branch cut."""


class PoleError(SkinDepthError, ZeroDivisionError):
    """Evaluation at a pole of the requested quantity."""


class UnsupportedError(SkinDepthError, NotImplementedError):
    """Requested model/axis combination is deliberately not provided."""

