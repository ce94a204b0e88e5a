"""Semantic exception hierarchy shared by all decint modules."""


class DecintError(Exception):
    """Base class for every error raised by this package."""


class InvalidMixtureError(DecintError, ValueError):
    """Mixture parameters violate the simplex/positivity contract."""


class DegenerateDataError(DecintError, ValueError):
    """Input data cannot support the requested fit (constant column, too few points)."""


class NonFiniteError(DecintError, ArithmeticError):
    """An objective or likelihood became NaN/inf where a finite value is required."""


class NonPositiveBayesFactorError(DecintError, ValueError):
    """A Bayes factor must be strictly positive to be classified."""


class ConfigError(DecintError, ValueError):
    """An experiment configuration violates its invariants."""
