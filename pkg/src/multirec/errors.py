"""Exception hierarchy.

The CLI maps these onto exit codes: ``SchemaError`` -> 1,
``PreconditionError`` -> 2, ``RootExtractionUnsupported`` -> 3.
"""


class MultirecError(Exception):
    pass


class SchemaError(MultirecError, ValueError):
    """Malformed input document."""


class PreconditionError(MultirecError, ValueError):
    """A mathematical precondition does not hold."""


class DomainError(PreconditionError):
    """Lattice point outside the domain of a system, or incomparable points."""


class SingularMatrixError(PreconditionError):
    pass


class IncompatibleSystemError(PreconditionError):
    pass


class NonCommutingError(PreconditionError):
    pass


class PeriodicityError(PreconditionError):
    pass


class ConvergenceError(PreconditionError):
    pass


class FloquetVerificationError(PreconditionError):
    pass


class RootExtractionUnsupported(MultirecError):
    """Commuting roots requested for a defective family with n >= 3.

    Existence of commuting k-th roots is only conjectured in that case, so
    no construction is attempted.
    """
