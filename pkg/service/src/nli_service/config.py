"""Service configuration."""

from __future__ import annotations

from dataclasses import dataclass


class ConfigError(ValueError):
    """Invalid service configuration."""


@dataclass(frozen=True)
class ServiceConfig:
    """Everything needed to load and serve one NLI model.

    ``dim``, when given, is a cross-check: startup fails if the loaded
    encoder's summary-vector width differs from it. ``entailment_label``
    is matched case-insensitively as a substring of the model's label
    names; ``entailment_index`` overrides the search for heads with
    nonstandard label names.
    """

    model_id: str
    host: str = "127.0.0.1"
    port: int = 8000
    max_batch: int = 32
    dim: int | None = None
    device: str = "cpu"
    entailment_label: str = "entail"
    entailment_index: int | None = None

    def __post_init__(self):
        if not self.model_id:
            raise ConfigError("model_id must be non-empty")
        if not 1 <= self.port <= 65535:
            raise ConfigError(f"port must be in [1, 65535], got {self.port}")
        if self.max_batch < 1:
            raise ConfigError(f"max_batch must be >= 1, got {self.max_batch}")
        if self.dim is not None and self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        if self.entailment_index is not None and self.entailment_index < 0:
            raise ConfigError(
                f"entailment_index must be >= 0, got {self.entailment_index}")
        if not self.entailment_label and self.entailment_index is None:
            raise ConfigError(
                "either entailment_label or entailment_index must be set")
