"""HTTP surface: /v1/features, /v1/prob, /health.

Request and response bodies are JSON. Batches are size-limited; empty and
malformed bodies are 4xx errors. Model inference is serialized behind a
lock, so concurrent requests are safe and the service is stateless.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .model import NliModel


class Pair(BaseModel):
    premise: str
    hypothesis: str


class PairsRequest(BaseModel):
    pairs: list[Pair] = Field(min_length=1)


def create_app(model: NliModel, max_batch: int | None = None) -> FastAPI:
    """Build the application around an already-loaded model."""
    limit = max_batch if max_batch is not None else model.config.max_batch
    app = FastAPI(title="nli-service")
    inference_lock = threading.Lock()

    def as_tuples(request: PairsRequest) -> list[tuple[str, str]]:
        if len(request.pairs) > limit:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.pairs)} exceeds max_batch {limit}")
        return [(pair.premise, pair.hypothesis) for pair in request.pairs]

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "dim": model.dim, "model": model.config.model_id}

    @app.post("/v1/features")
    def features(request: PairsRequest) -> dict:
        pairs = as_tuples(request)
        with inference_lock:
            vectors, truncated = model.features(pairs)
        return {"vectors": vectors.tolist(), "truncated": truncated}

    @app.post("/v1/prob")
    def prob(request: PairsRequest) -> dict:
        pairs = as_tuples(request)
        with inference_lock:
            probabilities, truncated = model.probs(pairs)
        return {"probs": probabilities, "truncated": truncated}

    return app
