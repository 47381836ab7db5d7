"""Exception types shared across the package."""


class CrowdboardError(Exception):
    """Base class for all package-specific errors."""


class DomainError(CrowdboardError, ValueError):
    """An argument is outside the operation's documented domain."""


class ConfigError(CrowdboardError):
    """Task or service configuration is malformed."""


class NotFoundError(CrowdboardError, KeyError):
    """A referenced task, submission or assignment does not exist."""


class PredictionParseError(CrowdboardError):
    """A prediction upload could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InconsistencyError(CrowdboardError):
    """Annotation records contradict each other or the task spec."""


class PlanningError(CrowdboardError):
    """No sample-size plan satisfies the requested target."""


class AuthorizationError(CrowdboardError):
    """Caller is not allowed to perform the operation."""


class StaleLeaseError(CrowdboardError):
    """The assignment lease expired or belongs to another annotator."""


class RateLimitedError(CrowdboardError):
    """Submitter exhausted their submission quota."""

    def __init__(self, retry_after_seconds: float):
        self.retry_after_seconds = retry_after_seconds
        super().__init__(f"rate limited, retry after {retry_after_seconds:.0f}s")


class MetricUnavailableError(CrowdboardError):
    """An external metric adapter failed; scoring proceeds without it."""
