"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class FapchanError(Exception):
    """Base class for all library errors."""


class DomainError(FapchanError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class IncompatibleKernelError(DomainError):
    """The kernel cannot be evaluated for the given parameters or operation."""


class ZeroDriftError(DomainError):
    """The operation is undefined (or degenerate) at zero drift."""


class InfiniteVarianceError(ZeroDriftError):
    """The noise variance diverges (zero-drift Cauchy limit)."""


class UnnormalizedError(FapchanError):
    """A probabilistic operation was requested on a density that does not integrate to one."""


class QuadratureError(FapchanError):
    """Adaptive integration failed to reach the requested tolerance or hit a NaN."""


class ValidationFailure(FapchanError):
    """A Monte-Carlo validation run did not meet its pass threshold."""
