"""Exception hierarchy shared across the toolkit.

The CLI maps these onto distinct exit codes, so new failure modes should
subclass the closest existing category instead of raising bare exceptions.
"""

from __future__ import annotations


class ExprepError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ExprepError):
    """Invalid or inconsistent experiment configuration."""


class DataError(ExprepError):
    """Malformed dataset, explanation, or dictionary input."""


class CacheError(DataError):
    """Corrupt or incompatible feature cache file."""


class ServiceError(ExprepError):
    """The remote feature service failed or returned a bad reply."""


class TrainingDiverged(ExprepError):
    """Training produced a non-finite loss."""
