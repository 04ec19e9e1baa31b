"""Exception types shared across the toolkit."""


class ParetoSearchError(Exception):
    """Base class for all toolkit errors."""


class OutOfBounds(ParetoSearchError):
    """A query location lies outside the problem's search box."""


class UnknownProblem(ParetoSearchError):
    """No benchmark problem with the requested id."""


class InvalidSpec(ParetoSearchError):
    """Kernel specification violates its constraints."""


class SingularCovariance(ParetoSearchError):
    """Covariance factorization failed even after escalating jitter."""


class InsufficientHistory(ParetoSearchError):
    """Fewer observations than the minimum needed to fit a surrogate."""


class InvalidDistribution(ParetoSearchError):
    """Malformed discrete distribution (weights or support)."""


class MismatchedSupport(ParetoSearchError):
    """Operation requires distributions on a common support."""


class InvalidK(ParetoSearchError):
    """Cluster count outside the valid range."""


class EmptyRecords(ParetoSearchError):
    """An operation received no analyzable records."""


class UnknownSubject(ParetoSearchError):
    """The dataset has no records for the requested subject."""


class EmptyDataset(ParetoSearchError):
    """Classifier training or evaluation received no rows."""


class ParseError(ParetoSearchError):
    """A data file failed to parse; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(ParetoSearchError):
    """A data file's header does not match the expected schema."""


class UnknownSession(ParetoSearchError):
    """No live session with the requested id."""


class SessionFinished(ParetoSearchError):
    """The session has already consumed its click budget or was closed."""
