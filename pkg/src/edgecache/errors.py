"""Exception types shared across the package."""


class EdgeCacheError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(EdgeCacheError):
    """An argument violates a documented precondition."""


class DimensionMismatch(EdgeCacheError):
    """Feature vectors of different dimensionality were compared.

    Raised on lookups as well: a cached vector whose dimension differs
    from the query's signals a misconfigured deployment.
    """


class ZeroNormVector(EdgeCacheError):
    """Cosine distance was requested for a zero-norm vector."""


class DuplicateRequestId(EdgeCacheError):
    """Two requests in one run share a request id."""


class ConfigError(EdgeCacheError):
    """A scenario config is malformed; carries the offending field path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class MismatchedTraces(EdgeCacheError):
    """Two record sets being summarized do not replay the same trace."""


class SimulationError(EdgeCacheError):
    """A run violated an internal invariant (e.g. a request never completed)."""
