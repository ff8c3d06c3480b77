class PotbalError(Exception):
    """Base class of every error raised by the library."""


class InvalidParameter(PotbalError, ValueError):
    pass


class InvalidCharge(PotbalError, ValueError):
    pass


class PartialLineOverlap(PotbalError, ValueError):
    pass


class LinePresent(PotbalError, ValueError):
    pass


class SignedInput(PotbalError, ValueError):
    pass


class LeftHalfPlanePoint(PotbalError, ValueError):
    pass


class OriginPoint(PotbalError, ValueError):
    pass


class OriginInSupport(PotbalError, ValueError):
    pass


class BlaschkeViolated(PotbalError, ValueError):
    pass


class NoSuchLine(PotbalError, ValueError):
    pass


class SupportViolation(PotbalError, ValueError):
    pass


class UnboundedSup(PotbalError, ValueError):
    pass


class ConditionMuRhFailed(PotbalError, ValueError):
    pass


class LindelofFailed(PotbalError, ValueError):
    pass


class IncomparableProfiles(PotbalError, ValueError):
    pass


class QuadratureFailure(PotbalError, ArithmeticError):
    pass
