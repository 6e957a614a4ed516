"""Exception types raised across kornlab."""


class KornLabError(Exception):
    """Base class for all kornlab errors."""


class NonPositiveThickness(KornLabError, ValueError):
    pass


class EmptySelector(KornLabError, ValueError):
    pass


class NotElliptic(KornLabError, ValueError):
    pass


class MixedTermsPresent(KornLabError, ValueError):
    pass


class UnknownDescriptor(KornLabError, ValueError):
    pass


class PeriodicIncompatibleProfiles(KornLabError, ValueError):
    pass


class SingularSystem(KornLabError, RuntimeError):
    pass


class NoConvergence(KornLabError, RuntimeError):
    pass


class BadInterval(KornLabError, ValueError):
    pass


class CutoffMissing(KornLabError, ValueError):
    pass


class BoundaryConditionViolated(KornLabError, ValueError):
    pass


class NonPositiveInput(KornLabError, ValueError):
    pass
