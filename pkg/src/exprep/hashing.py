"""Stable hashing used for cache keys, feature keys, and config identity.

Everything here must produce identical results across processes, platforms,
and Python versions: only hashlib primitives over length-framed UTF-8 bytes,
never the builtin ``hash``.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def stable_digest(*parts: str, size: int = 16) -> bytes:
    """Digest a sequence of strings with unambiguous length framing."""
    h = hashlib.blake2b(digest_size=size)
    for part in parts:
        raw = part.encode("utf-8")
        h.update(len(raw).to_bytes(8, "little"))
        h.update(raw)
    return h.digest()


def text_hash(text: str) -> str:
    """Hex key for one instantiated text; used in cache indexes."""
    return stable_digest(text).hex()


def config_hash(payload: dict[str, Any]) -> str:
    """Hex identity of a JSON-serializable mapping, key-order independent."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
