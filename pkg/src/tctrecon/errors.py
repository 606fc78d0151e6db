"""Shared exception types."""


class DegeneratePolynomialError(ValueError):
    """All polynomial coefficients are numerically zero."""


class NumericalError(RuntimeError):
    """A kernel produced a non-finite value; message names the offending inputs."""


class EmptyRegionError(ValueError):
    """A region predicate selected no voxels."""
