"""Bulk featurization of (instance, template) pairs into a feature cache.

Featurization is resumable: every computed vector is appended to the cache
before its index entry is written, and pairs already present are skipped, so
an interrupted run can be re-invoked and only pays for the missing work.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cache import FeatureCache
from .data import Instance
from .errors import ConfigError, ServiceError
from .hashing import text_hash
from .interpreters import Interpreter
from .templating import instantiate

DEFAULT_WRITE_BATCH = 256


@dataclass(frozen=True)
class FeaturizeStats:
    """Bookkeeping for one featurization pass."""

    pairs: int
    computed: int
    cache_hits: int
    interpreter_calls: int


def featurize_corpus(
    instances: list[Instance],
    templates: list[tuple[str, str]],
    interpreter: Interpreter,
    cache: FeatureCache,
    batch_size: int = DEFAULT_WRITE_BATCH,
) -> FeaturizeStats:
    """Interpret every instance against every (source_id, template) pair.

    Vectors land in ``cache`` keyed by (instance id, text hash). Pairs whose
    key is already cached are not recomputed; duplicate texts within the run
    are computed once.
    """
    if not interpreter.per_text:
        raise ConfigError("only per-text interpreters are cached; "
                          "pattern and ontology features are built at assembly time")
    if interpreter.dim != cache.dim:
        raise ConfigError(
            f"interpreter dim {interpreter.dim} does not match cache dim {cache.dim}")
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")

    calls_before = interpreter.calls
    pairs = 0
    hits = 0
    computed = 0
    pending: list[tuple[Instance, str, tuple[str, str]]] = []
    pending_keys: set[tuple[str, str]] = set()

    def flush() -> int:
        try:
            vectors = interpreter.interpret_many(
                [(inst, text) for inst, text, _ in pending])
        except ServiceError as exc:
            ids = sorted({inst.id for inst, _text, _key in pending})
            raise ServiceError(
                f"while featurizing instances {ids[:5]}: {exc}") from exc
        for (inst, _text, key), vector in zip(pending, vectors):
            cache.put(key[0], key[1], vector)
        done = len(pending)
        pending.clear()
        pending_keys.clear()
        return done

    for instance in instances:
        for source_id, template in templates:
            pairs += 1
            text = instantiate(instance, template, source_id).text
            key = (instance.id, text_hash(text))
            if key in cache or key in pending_keys:
                hits += 1
                continue
            pending.append((instance, text, key))
            pending_keys.add(key)
            if len(pending) >= batch_size:
                computed += flush()
    if pending:
        computed += flush()
    cache.flush()
    return FeaturizeStats(
        pairs=pairs,
        computed=computed,
        cache_hits=hits,
        interpreter_calls=interpreter.calls - calls_before,
    )
