"""HTTP client for the sentence-pair feature service.

Wire protocol (JSON, UTF-8):

    POST /v1/features  {"pairs": [{"premise": ..., "hypothesis": ...}, ...]}
        -> {"vectors": [[f32 x d], ...]}
    POST /v1/prob      same request -> {"probs": [p, ...]}
    GET  /health       -> {"status": "ok", "dim": d, "model": id}

Requests are batched and retried with exponential backoff; batches are
idempotent on the server, so a retry never corrupts state.
"""

from __future__ import annotations

import time

import numpy as np
import requests

from .errors import ServiceError

DEFAULT_BATCH_SIZE = 32
DEFAULT_TIMEOUT = 60.0
DEFAULT_RETRIES = 3
DEFAULT_BACKOFF = 0.5


class NliServiceClient:
    def __init__(
        self,
        endpoint: str,
        batch_size: int = DEFAULT_BATCH_SIZE,
        timeout: float = DEFAULT_TIMEOUT,
        max_retries: int = DEFAULT_RETRIES,
        backoff: float = DEFAULT_BACKOFF,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.batch_size = batch_size
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.session = session or requests.Session()

    def health(self) -> dict:
        reply = self._request_json("GET", "/health", None)
        if reply.get("status") != "ok":
            raise ServiceError(f"service at {self.endpoint} is not healthy: {reply}")
        return reply

    def features(self, pairs: list[tuple[str, str]], dim: int) -> np.ndarray:
        """Feature vectors for (premise, hypothesis) pairs, in request order."""
        out = np.empty((len(pairs), dim), dtype=np.float32)
        for start, reply in self._batched("/v1/features", pairs):
            vectors = reply.get("vectors")
            if not isinstance(vectors, list):
                raise ServiceError("malformed reply: missing 'vectors'")
            if len(vectors) != min(self.batch_size, len(pairs) - start):
                raise ServiceError(
                    f"reply has {len(vectors)} vectors for a "
                    f"{min(self.batch_size, len(pairs) - start)}-pair batch")
            for i, vec in enumerate(vectors):
                if len(vec) != dim:
                    raise ServiceError(
                        f"service returned a {len(vec)}-dim vector, expected {dim}")
                out[start + i] = vec
        return out

    def probs(self, pairs: list[tuple[str, str]]) -> np.ndarray:
        """Entailment probabilities for pairs, each validated to lie in [0, 1]."""
        out = np.empty(len(pairs), dtype=np.float32)
        for start, reply in self._batched("/v1/prob", pairs):
            probs = reply.get("probs")
            if not isinstance(probs, list):
                raise ServiceError("malformed reply: missing 'probs'")
            for i, p in enumerate(probs):
                if not isinstance(p, (int, float)) or not 0.0 <= p <= 1.0:
                    raise ServiceError(f"probability out of [0, 1]: {p}")
                out[start + i] = p
        return out

    def _batched(self, route: str, pairs: list[tuple[str, str]]):
        for start in range(0, len(pairs), self.batch_size):
            chunk = pairs[start : start + self.batch_size]
            body = {"pairs": [{"premise": p, "hypothesis": h} for p, h in chunk]}
            yield start, self._request_json("POST", route, body)

    def _request_json(self, method: str, route: str, body: dict | None) -> dict:
        url = self.endpoint + route
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self.session.request(method, url, json=body, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if 500 <= resp.status_code < 600:
                last_error = ServiceError(f"{url} returned {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ServiceError(f"{url} returned {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError:
                raise ServiceError(f"{url} returned non-JSON body") from None
        raise ServiceError(f"{url} unreachable after {self.max_retries + 1} attempts: {last_error}")
