"""
Custom exceptions for numerical operations.
"""

from typing import Optional, Sequence


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class DimensionMismatchError(ToolkitError, ValueError):
    """Raised when vectors, coefficient sequences or weights disagree in size."""

    def __init__(self, expected: int, actual: int, what: str = "vector", message: Optional[str] = None):
        self.expected = expected
        self.actual = actual
        self.what = what
        if message is None:
            message = f"Dimension mismatch for {what}: expected {expected}, got {actual}"
        super().__init__(message)


class IncompleteFamilyError(ToolkitError, ValueError):
    """Raised when a family does not span the ambient space."""

    def __init__(self, rank: int, dim: int, message: Optional[str] = None):
        self.rank = rank
        self.dim = dim
        if message is None:
            message = f"incomplete family: rank {rank} < dim {dim}"
        super().__init__(message)


class NotParsevalError(ToolkitError, ValueError):
    """Raised when an operation requires a Parseval frame and the defect is too large."""

    def __init__(self, defect: float, tolerance: float, message: Optional[str] = None):
        self.defect = defect
        self.tolerance = tolerance
        if message is None:
            message = f"not a Parseval frame: defect {defect:.3e} > {tolerance:.1e}"
        super().__init__(message)


class NotProjectorError(ToolkitError, ValueError):
    """Raised when a matrix is not a Hermitian idempotent."""

    def __init__(self, hermitian_defect: float, idempotent_defect: float, message: Optional[str] = None):
        self.hermitian_defect = hermitian_defect
        self.idempotent_defect = idempotent_defect
        if message is None:
            message = (
                f"not an orthogonal projector: ||P-P*|| = {hermitian_defect:.3e}, "
                f"||P^2-P|| = {idempotent_defect:.3e}"
            )
        super().__init__(message)


class MixedBranchError(ToolkitError, ValueError):
    """Raised when the spectrum of X*X lies on both sides of 1."""

    def __init__(self, smallest: float, largest: float, message: Optional[str] = None):
        self.smallest = smallest
        self.largest = largest
        if message is None:
            message = f"mixed branch unsupported: spectrum of X*X spans [{smallest:.6g}, {largest:.6g}]"
        super().__init__(message)


class NotRieszSubfamilyError(ToolkitError, ValueError):
    """Raised when the chosen subfamily is not (numerically) a Riesz basis."""

    def __init__(self, condition: float, message: Optional[str] = None):
        self.condition = condition
        if message is None:
            message = f"not a Riesz subfamily: Gram condition number {condition:.3e}"
        super().__init__(message)


class DegenerateWeightsError(ToolkitError, ValueError):
    """Raised when weights repeat or nearly repeat inside a secular solve."""

    def __init__(self, min_gap: float, message: Optional[str] = None):
        self.min_gap = min_gap
        if message is None:
            message = f"degenerate weights unsupported in secular solver (min gap {min_gap:.3e})"
        super().__init__(message)


class WeightOrderError(ToolkitError, ValueError):
    """Raised when block or family weights violate the strict ordering."""

    def __init__(self, position: int, message: Optional[str] = None):
        self.position = position
        if message is None:
            message = f"weights must be strictly increasing (violated at position {position})"
        super().__init__(message)


class IndexOutOfRangeError(ToolkitError, IndexError):
    """Raised when a frame label or ladder index is not available."""

    def __init__(self, index: object, valid: Sequence[object] | str, message: Optional[str] = None):
        self.index = index
        if message is None:
            message = f"index {index!r} out of range ({valid})"
        super().__init__(message)


class EmptyScheduleError(ToolkitError, ValueError):
    """Raised when a partial-sum schedule has no usable truncation point."""

    def __init__(self, schedule: Sequence[int], message: Optional[str] = None):
        self.schedule = [int(n) for n in schedule]
        if message is None:
            message = f"schedule must hold truncation points >= 1, got {self.schedule}"
        super().__init__(message)


class GridResolutionError(ToolkitError, ValueError):
    """Raised when a grid is too small for the requested Hermite order."""

    def __init__(self, n: int, half_width: float, required: float, message: Optional[str] = None):
        self.n = n
        self.half_width = half_width
        self.required = required
        if message is None:
            message = (
                f"insufficient L for Hermite order {n}: usable half-width {half_width:.4g} < {required:.4g}"
            )
        super().__init__(message)


class GridAlignmentError(ToolkitError, ValueError):
    """Raised when a translation is not an integer number of grid cells."""

    def __init__(self, alpha: float, spacing: float, message: Optional[str] = None):
        self.alpha = alpha
        self.spacing = spacing
        if message is None:
            message = f"alpha = {alpha!r} is not a nonnegative multiple of the grid spacing {spacing!r}"
        super().__init__(message)


class WeightBoundError(ToolkitError, ValueError):
    """Raised when |m(x)| leaves the open interval (0, 1) on the grid."""

    def __init__(self, m_lo: float, m_hi: float, message: Optional[str] = None):
        self.m_lo = m_lo
        self.m_hi = m_hi
        if message is None:
            message = f"weight bound violated: min |m| = {m_lo:.6g}, max |m| = {m_hi:.6g}; need 0 < m_lo <= m_hi < 1"
        super().__init__(message)


class DegenerateWeightFunctionError(ToolkitError, ValueError):
    """Raised when |m| or q = sqrt(1 - |m|^2) gets too close to zero."""

    def __init__(self, which: str, minimum: float, message: Optional[str] = None):
        self.which = which
        self.minimum = minimum
        if message is None:
            message = f"weight too close to degenerate: min {which} = {minimum:.3e}"
        super().__init__(message)


class InvariantViolationError(ToolkitError, RuntimeError):
    """Raised when one or more asserted invariants fail."""

    def __init__(self, invariants: Sequence[str], message: Optional[str] = None):
        self.invariants = list(invariants)
        if message is None:
            message = "invariant failed: " + ", ".join(self.invariants)
        super().__init__(message)


class NotPositiveDefiniteError(ToolkitError, ValueError):
    """Raised when a Hermitian matrix has eigenvalues at or below the square-root floor."""

    def __init__(self, smallest: float, floor: float, message: Optional[str] = None):
        self.smallest = smallest
        self.floor = floor
        if message is None:
            message = f"matrix is not positive definite: smallest eigenvalue {smallest:.3e} <= {floor:.1e}"
        super().__init__(message)


class SingularMatrixError(ToolkitError, ValueError):
    """Raised when an operator that must be invertible is (numerically) singular."""

    def __init__(self, condition: float, message: Optional[str] = None):
        self.condition = condition
        if message is None:
            message = f"matrix is not invertible: condition number {condition:.3e}"
        super().__init__(message)
