"""Exception types raised by cpkit."""


class CPKitError(ValueError):
    """Base class for all cpkit errors."""


class DimensionMismatch(CPKitError):
    pass


class NotHermitian(CPKitError):
    pass


class NonOrthonormalBasis(CPKitError):
    pass


class WrongBasis(CPKitError):
    pass


class NotCompletelyPositive(CPKitError):
    pass


class BasisNotUnitFirst(CPKitError):
    """The basis does not start with F_0 = I / sqrt(N)."""


class InvariantViolation(CPKitError):
    pass


class SingularPropagator(CPKitError):
    pass


class InvalidState(CPKitError):
    pass
