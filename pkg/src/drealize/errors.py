"""Exception hierarchy shared by all modules."""


class RealizationError(Exception):
    """Base class for every error raised by :mod:`drealize`."""


class InputError(RealizationError, ValueError):
    """Malformed or inconsistent input (shapes, ranges, JSON schema)."""


class DegreeTooLargeError(InputError):
    """A multi-index weight no longer fits in double precision."""


class NotContractiveError(RealizationError):
    """An operator required to be a contraction is not one."""


class SingularResolventError(RealizationError):
    """``I - Z(lambda) A`` is numerically singular at the requested point."""

    def __init__(self, point, condition):
        self.point = tuple(complex(z) for z in point)
        self.condition = float(condition)
        super().__init__(
            f"resolvent I - Z(lambda)A is singular at lambda={self.point} "
            f"(condition number {self.condition:.3e})"
        )


class InconclusiveError(RealizationError):
    """A numerical test could not reach a verdict at the configured caps."""


class GramianDivergenceError(RealizationError):
    """The observability gramian series does not converge."""


class NotExactlyObservableError(RealizationError):
    """The observability gramian is not boundedly invertible."""


class CaptureError(RealizationError):
    """A truncated subspace failed its reproducing-kernel validation."""


class NonInvariantError(RealizationError):
    """A subspace is not invariant under the backward shifts.

    The attached ``report`` names the offending basis vector and axis.
    """

    def __init__(self, report):
        self.report = report
        idx, axis, res = report.worst
        super().__init__(
            f"subspace not invariant under backward shift: basis vector {idx} "
            f"leaves the span under shift axis {axis} (residual {res:.3e})"
        )


class HypothesisError(RealizationError):
    """A precondition of a construction (isometry, stability, ...) fails."""
