"""Exception hierarchy shared across the toolkit."""


class DelaycastError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DelaycastError):
    """Invalid or incomplete run configuration."""


class SchemaError(DelaycastError):
    """Column mapping or feature-schema mismatch."""


class ShapeError(DelaycastError):
    """Array width/length mismatch between data and a model or metric."""


class DomainError(DelaycastError):
    """Argument outside its valid domain (negative distance, bad fraction, ...)."""


class EmptyTableError(DelaycastError):
    """An operation that needs rows received none."""


class StateError(DelaycastError):
    """Operation invoked on a stale or wrong-mode object (e.g. stale backward cache)."""


class DivergenceError(DelaycastError):
    """Training produced a non-finite loss."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch
