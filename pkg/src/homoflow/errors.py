"""Exception hierarchy shared by all homoflow modules.

The CLI maps these one-to-one onto process exit codes, so every failure a
module can signal has its own class here.
"""


class HomoflowError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class DomainError(HomoflowError, ValueError):
    """Parameters or evaluation points outside an operation's domain."""

    exit_code = 2


class AxisError(DomainError):
    """Field evaluation requested on (or numerically too near) the x3-axis."""


class PoleError(DomainError):
    """Closed-form profile evaluated at its pole 1 + gamma*y/2 = 0."""


class InvalidBracket(DomainError):
    """Bisection bracket whose endpoints share the same predicate value."""


class NonFiniteState(HomoflowError, ArithmeticError):
    """ODE state left the finite region or exceeded the magnitude cap."""

    exit_code = 5

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class BlowUp(NonFiniteState):
    """Profile trajectory blew up before reaching the matching point.

    Signals that gamma lies outside [gamma_minus(c), gamma_plus(c)].
    """

    exit_code = 3

    def __init__(self, message, gamma=None, side=None, t=None, state=None):
        super().__init__(message, t=t, state=state)
        self.gamma = gamma
        self.side = side


class StepUnderflow(NonFiniteState):
    """Adaptive step size fell below the machine-limited floor."""


class QuadFailure(HomoflowError):
    """Quadrature did not reach the requested tolerance."""

    exit_code = 4


# Quadrature-level name used by the numerics kernels.
NoConvergence = QuadFailure


class NonConvergence(QuadFailure):
    """A limiting sequence (epsilon -> 0) failed its Cauchy test."""


class CFLViolation(HomoflowError):
    """Explicit time step larger than the stability bound."""

    exit_code = 5


class MismatchedHistories(HomoflowError, ValueError):
    """Two energy histories that cannot be compared sample by sample."""

    exit_code = 2
