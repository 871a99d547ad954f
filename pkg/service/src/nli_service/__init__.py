"""Sentence-pair NLI model server.

Wraps a pretrained sequence-classification encoder behind three JSON
endpoints: per-pair summary feature vectors, per-pair entailment
probabilities, and a health check advertising the model and its feature
dimension.
"""

from .app import create_app
from .config import ConfigError, ServiceConfig
from .model import ModelError, NliModel, resolve_entailment_index

__version__ = "1.0.0"

__all__ = [
    "ConfigError",
    "ModelError",
    "NliModel",
    "ServiceConfig",
    "create_app",
    "resolve_entailment_index",
]
