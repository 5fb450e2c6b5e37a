"""Exception hierarchy shared by the solver, group and experiment layers."""


class ParameterError(ValueError):
    """Invalid argument (range, shape, duplicated nodes, unknown name)."""


class SingularMatrixError(ArithmeticError):
    pass


class EvaluationError(ArithmeticError):
    """A residual produced a non-finite value.

    Carries the offending time and state so callers can report where the
    scheme left its admissible set (e.g. ``U`` crossing zero).
    """

    def __init__(self, message, t=None, u=None):
        super().__init__(message)
        self.t = t
        self.u = u


class NonConvergence(RuntimeError):
    """Newton iteration failed (iteration cap, divergence or non-finite iterate)."""

    def __init__(self, message, iterations=0, residual=float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class IntegrationFailure(RuntimeError):
    """Raised by time marching when an element solve does not converge.

    ``trajectory`` holds the elements solved before ``element``.
    """

    def __init__(self, element, trajectory, cause=None):
        super().__init__(f"element {element} failed: {cause}")
        self.element = element
        self.trajectory = trajectory
        self.cause = cause


class DomainError(ValueError):
    """Point outside the admissible domain of a group action."""


class FrameDomainError(DomainError):
    pass


class FoldError(DomainError):
    """dt_hat/dt vanished or changed sign: the transformed curve is not a graph."""


class RangeError(ValueError):
    pass
