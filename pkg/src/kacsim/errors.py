"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to reach its requested tolerance.

    ``value`` holds the best estimate available when the procedure gave up and
    ``achieved`` the error estimate attached to it.
    """

    def __init__(self, message, value=float("nan"), achieved=float("inf")):
        super().__init__(f"{message} (value={value!r}, achieved={achieved!r})")
        self.value = value
        self.achieved = achieved


class ConfigError(ValueError):
    """Invalid configuration document or override."""

    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.key = key
        self.line = line


class ClockError(RuntimeError):
    """A particle clock was asked to run backwards."""
