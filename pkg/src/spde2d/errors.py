class InvalidConfigError(ValueError):
    """A configuration or parameter value violates its documented domain."""


class GridAlignmentError(InvalidConfigError):
    """A thinned node does not coincide with an observation node."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class CutoffError(RuntimeError):
    """A truncated lattice sum has an estimated tail above tolerance."""


class DegenerateDataError(RuntimeError):
    """The data carry no usable signal for the requested estimator."""
