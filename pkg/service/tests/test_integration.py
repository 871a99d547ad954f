"""Wire-protocol integration: the experiment toolkit's client against a
live instance of this service.

Runs only when the consumer package is installed; everything crosses the
HTTP boundary — no shared code paths.
"""

from __future__ import annotations

import threading
import time

import numpy as np
import pytest

exprep = pytest.importorskip("exprep")

from conftest import HIDDEN


@pytest.fixture(scope="module")
def live_endpoint(app):
    import uvicorn

    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=0,
                                           log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_health_over_the_wire(live_endpoint, service_config):
    client = exprep.NliServiceClient(live_endpoint)
    body = client.health()
    assert body == {"status": "ok", "dim": HIDDEN,
                    "model": service_config.model_id}


def test_features_match_direct_model_output(live_endpoint, model):
    client = exprep.NliServiceClient(live_endpoint, batch_size=4)
    pairs = [(f"alice met ben {i}", f"alice is married to ben {i}")
             for i in range(10)]
    over_wire = client.features(pairs, dim=HIDDEN)
    assert over_wire.shape == (10, HIDDEN)
    assert over_wire.dtype == np.float32
    direct, _ = model.features(pairs)
    # JSON round-trips float32 exactly via the shortest repr, so the wire
    # introduces no drift at all.
    assert np.array_equal(over_wire, direct)


def test_probs_match_direct_model_output(live_endpoint, model):
    client = exprep.NliServiceClient(live_endpoint, batch_size=3)
    pairs = [(f"carol works with david {i}", "carol is married to david")
             for i in range(7)]
    over_wire = client.probs(pairs)
    direct, _ = model.probs(pairs)
    assert over_wire.shape == (7,)
    assert np.allclose(over_wire, np.asarray(direct), rtol=0, atol=0)


def test_client_batching_is_invisible(live_endpoint):
    pairs = [(f"premise {i}", f"hypothesis {i}") for i in range(9)]
    small_batches = exprep.NliServiceClient(live_endpoint, batch_size=2)
    one_batch = exprep.NliServiceClient(live_endpoint, batch_size=32)
    assert np.array_equal(small_batches.features(pairs, dim=HIDDEN),
                          one_batch.features(pairs, dim=HIDDEN))
