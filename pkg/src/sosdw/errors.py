"""Exception types raised by the evaluators."""


class SosdwError(Exception):
    pass


class PoleError(SosdwError, ZeroDivisionError):
    """A denominator vanished. ``factor`` names the offending term."""

    def __init__(self, factor, value=None):
        self.factor = factor
        self.value = value
        msg = f"pole: {factor} vanishes"
        if value is not None:
            msg += f" (|value| = {abs(value):.3e})"
        super().__init__(msg)


class DomainError(SosdwError, ValueError):
    pass


class NumericError(SosdwError, ArithmeticError):
    pass


class ResourceError(SosdwError, RuntimeError):
    pass


class ValidationError(SosdwError, ValueError):
    pass
