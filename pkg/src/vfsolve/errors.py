"""Exception types raised across the package."""


class VfsolveError(Exception):
    """Base class for all package errors."""


class DimensionError(VfsolveError, ValueError):
    pass


class NonsmoothPointError(VfsolveError, ValueError):
    """Gradient requested at a point where the function is not differentiable."""


class NoConjugateError(VfsolveError, ValueError):
    """Convex conjugate requested for a nonconvex misfit."""


class UnsupportedKindError(VfsolveError, NotImplementedError):
    pass


class NotDifferentiableError(VfsolveError, ValueError):
    """A derivative was requested from a sample not flagged differentiable."""


class SolverError(VfsolveError, RuntimeError):
    pass


class SigmaUnreachableError(SolverError):
    """The target misfit lies below the infimum of the value function."""


class ConfigError(VfsolveError, ValueError):
    pass
