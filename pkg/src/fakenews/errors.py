"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """An argument is outside the domain of the operation."""


class InvalidStrategyError(ArgumentError):
    """A transmitter strategy produces response probabilities outside [0, 1]."""


class DegenerateStrategyError(ArgumentError):
    """The strategy makes 1 - alpha + beta vanish (alpha=1, beta=0)."""


class DegenerateParameterizationError(ArgumentError):
    """The kappa/lambda/chi reparameterization has a zero denominator."""


class DataError(Exception):
    """Input data file is missing or unreadable."""
