"""Exception types raised across the package."""


class QSearchError(Exception):
    """Base class for package errors."""


class ConfigurationError(QSearchError, ValueError):
    """Invalid parameters, grids or experiment specs."""


class DomainError(QSearchError, ValueError):
    """A query location lies outside the unit interval."""


class ExtentError(QSearchError, ValueError):
    """A planar point lies outside the raster extent."""


class MisuseError(QSearchError, ValueError):
    """An algorithm was handed an oracle it cannot work with."""


class ContradictionError(QSearchError, ArithmeticError):
    """A Bayesian update received a label with zero predictive probability."""


class EstimationError(QSearchError, ValueError):
    """Not enough data to form an estimate."""
