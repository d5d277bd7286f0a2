"""Exception hierarchy shared by all modules."""


class ElastoScatterError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ElastoScatterError, ValueError):
    """An argument lies outside the domain of a function."""


class InvalidMaterialError(ElastoScatterError, ValueError):
    """Lame parameters violate strong ellipticity or the frequency is not positive."""


class InvalidCutoffError(ElastoScatterError, ValueError):
    """The cube half-width does not exceed twice the support radius."""


class GridError(ElastoScatterError, ValueError):
    """Invalid grid, or two objects defined on different grids."""


class LayoutError(ElastoScatterError, ValueError):
    """Sample data does not match the expected node layout."""


class SupportError(ElastoScatterError, ValueError):
    """A potential has nonzero samples outside its declared support radius."""

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class WaveError(ElastoScatterError, ValueError):
    """Invalid incident wave: bad direction, polarization or frequency mismatch."""


class NumericFaultError(ElastoScatterError, ArithmeticError):
    """Non-finite values produced by an operator."""


class ConvergenceError(ElastoScatterError, RuntimeError):
    """An iterative solve did not reach its tolerance."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class ConfigError(ElastoScatterError, ValueError):
    """Invalid run configuration."""
