"""Exception types shared across the suite."""


class CapevalError(Exception):
    """Base class for all errors raised by this package."""


class MalformedLineError(CapevalError):
    """A data file line does not match its expected format."""

    def __init__(self, path: str, line_no: int, reason: str):
        self.path = path
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{path}:{line_no}: {reason}")


class DuplicateIdError(CapevalError):
    """An identifier that must be unique appeared twice."""


class DanglingReferenceError(CapevalError):
    """A record references a video or caption that does not exist."""


class EmptyCaptionError(CapevalError):
    """Caption text reduced to zero tokens."""


class NoEligibleDonorError(CapevalError):
    """No donor caption satisfies the degradation preconditions."""


class UndefinedCorrelationError(CapevalError):
    """Correlation requested on a zero-variance sample."""


class InsufficientSampleError(CapevalError):
    """A statistical test was invoked below its minimum sample size."""


class PlanError(CapevalError):
    """HIT plan construction or lookup failed."""
