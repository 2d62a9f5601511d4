"""Exception hierarchy shared across the package."""


class VexlapError(Exception):
    """Base class for all package errors."""


class NonAdmissibleExponent(VexlapError, ValueError):
    pass


class IncompatibleSampling(VexlapError, ValueError):
    pass


class ResolutionMismatch(VexlapError, ValueError):
    pass


class ResolutionTooCoarse(VexlapError, ValueError):
    pass


class UnknownGenerator(VexlapError, ValueError):
    pass


class DescriptorError(VexlapError, ValueError):
    pass


class NoActiveDofs(VexlapError):
    pass


class NonConvergence(VexlapError, RuntimeError):
    def __init__(self, iterations, best_residual, message=None):
        self.iterations = iterations
        self.best_residual = best_residual
        super().__init__(message or f"no convergence after {iterations} iterations (best residual {best_residual:.3e})")


class DegeneratePair(VexlapError, ValueError):
    pass


class EmptyConstraintSet(VexlapError, ValueError):
    pass


class PreconditionViolated(VexlapError, ValueError):
    pass


class ComponentBudgetExceeded(VexlapError):
    pass


class ConditionCheckFailed(VexlapError):
    pass


class MeshError(VexlapError, ValueError):
    pass
