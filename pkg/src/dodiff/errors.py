"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """A structural precondition or a declared data invariant is violated."""


class NumericError(RuntimeError):
    """A numerical procedure failed its accuracy or convergence certificate."""
