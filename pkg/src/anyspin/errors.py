"""Exception types shared across modules."""


class AnyspinError(Exception):
    pass


class NonUnitaryInput(AnyspinError):
    pass


class DetNotOne(AnyspinError):
    pass


class NoScalar(AnyspinError):
    pass


class PolarAxisSingularity(AnyspinError):
    pass


class ZeroMomentum(AnyspinError):
    pass


class SpecViolation(AnyspinError):
    pass


class QuadratureUnderResolved(AnyspinError):
    pass


class DimensionOverflow(AnyspinError):
    pass


class UnknownMode(AnyspinError):
    pass


class NoConvergence(AnyspinError):
    pass


class EmptyWindow(AnyspinError):
    pass


class ConfigInvalid(AnyspinError):
    """Raised with the name of the violated invariant."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class CertificateFailure(AnyspinError):
    """A spectral certificate was evaluated and did not hold."""
