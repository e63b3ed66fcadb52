"""Starts one real HTTP server for the whole suite.

Conformance is judged by the actual consumer: tests drive the genswap
gateway client at the live server, so any response that violates the
wire protocol fails to parse.
"""

from __future__ import annotations

import threading
import time

import pytest
import uvicorn

from modelserver import RuleAdapter, create_app


@pytest.fixture(scope="session")
def server_url():
    app = create_app(RuleAdapter(), workers=8)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


@pytest.fixture(scope="session")
def gateway(server_url):
    from genswap.gateway import ModelGateway
    from genswap.protocol import Capability

    return ModelGateway.from_urls({cap: server_url for cap in Capability})
