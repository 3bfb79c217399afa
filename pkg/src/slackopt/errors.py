"""Exception types shared across the package."""


class SlackoptError(Exception):
    """Base class for all package errors."""


class MalformedCase(SlackoptError):
    """Case text could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DisconnectedNetwork(SlackoptError):
    """In-service subgraph splits into several components."""

    def __init__(self, components):
        self.components = components
        sizes = sorted((len(c) for c in components), reverse=True)
        super().__init__(f"network has {len(components)} components (sizes {sizes})")


class NonPositiveSusceptance(SlackoptError):
    pass


class ZeroGeneration(SlackoptError):
    pass


class NotConnected(SlackoptError):
    """Laplacian spectrum indicates a numerically disconnected graph."""


class NoConvergence(SlackoptError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"Newton iteration did not converge after {iterations} steps "
            f"(residual {residual:.3e})"
        )


class SlackNotGenerator(SlackoptError):
    pass


class BadParticipation(SlackoptError):
    pass


class ConstraintViolated(SlackoptError):
    pass


class EmptyCandidateSet(SlackoptError):
    pass


class NonConvexObjective(SlackoptError):
    """Quadratic loss model lost convexity (overloaded network)."""


class OverloadedLineWarning(UserWarning):
    """Some phase difference exceeds pi/2 at the solution."""


class IgnoredDataWarning(UserWarning):
    """Case data (shunts, taps) present in the file but not modeled."""
