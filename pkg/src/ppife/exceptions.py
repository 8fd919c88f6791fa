"""Exception types raised by the solver."""


class PPIFEError(Exception):
    """Base class for all solver errors."""


class MultipleCrossings(PPIFEError):
    """The interface crosses a segment more than once."""


class MeshTooCoarse(PPIFEError):
    """The mesh does not resolve the interface curve."""

    def __init__(self, message, edge=None):
        super().__init__(message)
        self.edge = edge


class DegenerateCut(PPIFEError):
    """A cut that cannot be turned into two proper sub-polygons."""


class SingularLocalSystem(PPIFEError):
    """The 8x8 immersed shape function system has a vanishing pivot."""

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class NoConvergence(PPIFEError):
    """An iterative solver hit its iteration limit."""

    def __init__(self, message, iterations=None, residual=None, step=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.step = step


class UsageError(PPIFEError, ValueError):
    """Invalid command line or configuration input."""
