"""Exception hierarchy shared by all modules."""


class ProcmultError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(ProcmultError, ValueError):
    pass


class DegenerateCone(ProcmultError, ValueError):
    """The cone is {0}, a line, or the whole space."""


class EmptySet(ProcmultError, ValueError):
    pass


class NoBase(ProcmultError):
    """The cone has no base (its quasi-interior dual is empty)."""


class NotQuasiInterior(ProcmultError, ValueError):
    pass


class EpsilonOutOfRange(ProcmultError, ValueError):
    pass


class EpsilonTooLarge(ProcmultError, ValueError):
    pass


class SeparationViolated(ProcmultError):
    def __init__(self, message, sample=None):
        super().__init__(message)
        self.sample = sample


class RegularityViolated(ProcmultError):
    """Some requested parameter z has an empty value set V(z)."""


class AnchorMissing(ProcmultError, KeyError):
    pass


class NotSublinear(ProcmultError, ValueError):
    pass


class NotPositive(ProcmultError, ValueError):
    """A scalar process whose value at the origin is not the half-line."""


class UnboundedBase(ProcmultError, ValueError):
    pass


class Unbounded(ProcmultError):
    pass


class NondegeneracyViolated(ProcmultError):
    def __init__(self, message, sample=None):
        super().__init__(message)
        self.sample = sample


class NoBoundedBase(ProcmultError):
    pass


class CertificateFailed(ProcmultError):
    def __init__(self, message, certificate=None, process=None):
        super().__init__(message)
        self.certificate = certificate
        self.process = process


class Infeasible(ProcmultError):
    pass


class GapExceedsTolerance(ProcmultError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConsistencyViolated(ProcmultError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class ParseError(ProcmultError):
    pass


class SchemaError(ProcmultError):
    def __init__(self, message, errors=()):
        super().__init__(message)
        self.errors = list(errors)


class UnknownCommand(ProcmultError):
    pass
