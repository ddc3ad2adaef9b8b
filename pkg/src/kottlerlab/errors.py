"""Exception types shared across the package.

Every operation that can reject its input raises one of these instead of a
bare ValueError, so callers (and the CLI exit-code mapping) can distinguish
domain rejections from genuine bugs.
"""


class KottlerLabError(Exception):
    """Base class for all package errors."""


class MassOutOfRange(KottlerLabError):
    """Mass outside the admissible range for the requested cross-section curvature."""


class DomainError(KottlerLabError):
    """Argument outside the mathematical domain of the operation."""


class ConvergenceFailure(KottlerLabError):
    """Iteration budget exhausted; indicates an implementation bug, not a domain condition."""


class DegenerateDerivative(KottlerLabError):
    """0/0 derivative at the degenerate-horizon endpoint; the one-sided limit exists.

    The limit value is carried in the ``limit`` attribute.
    """

    def __init__(self, message, limit):
        super().__init__(message)
        self.limit = limit


class GridTooCoarse(KottlerLabError):
    """Too few samples for the finite-difference stencil width."""


class CriticalPoint(KottlerLabError):
    """Level-set geometry requested where the potential gradient vanishes."""


class QuadratureFailure(KottlerLabError):
    """Quadrature panels produced non-finite values."""


class StepSizeUnderflow(KottlerLabError):
    """Adaptive integrator drove the step size below its floor."""


class ConstraintBlowup(KottlerLabError):
    """Scalar-curvature constraint violation exceeded the abort threshold along a trajectory."""


class TailTooShort(KottlerLabError):
    """Profile does not extend far enough toward infinity for the requested extraction."""
