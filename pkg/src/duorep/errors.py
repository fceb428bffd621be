"""Exception hierarchy. Every error raised by the library derives from DuorepError."""


class DuorepError(Exception):
    """Base class; the CLI turns these into structured error JSON."""


class NotAssociative(DuorepError):
    pass


class SizeLimit(DuorepError):
    pass


class NotRightSemicentral(DuorepError):
    pass


class NotRegularLeftDuo(DuorepError):
    pass


class NotIdempotent(DuorepError):
    pass


class GroundSetMismatch(DuorepError):
    pass


class SearchExhausted(DuorepError):
    pass


class BadPrime(DuorepError):
    pass


class BadCharacteristic(DuorepError):
    pass


class NonAbelianFiber(DuorepError):
    pass


class NonSplitBasic(DuorepError):
    pass


class NotApplicable(DuorepError):
    pass


class ApexMismatch(DuorepError):
    pass


class DiamondViolation(DuorepError):
    pass


class NoConsistentSigns(DuorepError):
    pass


class NotGraded(DuorepError):
    pass


class NotCW(DuorepError):
    pass


class LengthExceeded(DuorepError):
    pass


class MinimalityViolation(DuorepError):
    pass
