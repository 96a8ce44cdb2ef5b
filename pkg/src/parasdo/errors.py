"""Exception hierarchy used across the package."""


class ParasdoError(Exception):
    """Base class for all package errors."""


class DimensionError(ParasdoError, ValueError):
    """Operands have incompatible shapes."""


class PreconditionError(ParasdoError, ValueError):
    """An input violates a documented precondition."""


class ValidationError(ParasdoError, ValueError):
    """A problem instance fails validation.

    ``check`` names the failed check so callers can report it.
    """

    def __init__(self, message, check=None):
        super().__init__(message)
        self.check = check


class InfeasibleError(ParasdoError):
    """An affine system or a feasibility problem has no (strict) solution.

    ``side`` is ``"primal"`` or ``"dual"`` when the failed probe belongs to one side.
    """

    def __init__(self, message, side=None):
        super().__init__(message)
        self.side = side


class NonConvergenceError(ParasdoError):
    """An iterative solver stopped without meeting its tolerance.

    Carries the last residual and the iteration count.
    """

    def __init__(self, message, residual=None, iterations=None, point=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.point = point


class SingularJacobianError(NonConvergenceError):
    """The Newton system is numerically singular."""


class IdentificationError(ParasdoError):
    """The optimal partition could not be identified along the path.

    ``trajectory`` holds the central solutions computed before giving up.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory or []


class FaceInfeasibleError(InfeasibleError):
    """The optimal face implied by a partition approximation is empty."""
