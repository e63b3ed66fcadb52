"""Shared paths and fixtures for the test suite.

Most tests run against the bundled fixture corpus and its recorded backend
responses, so everything here is offline and deterministic.
"""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from genswap.gateway import ModelGateway
from genswap.pipeline import load_records
from genswap.protocol import Capability
from genswap.records import read_jsonl

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
BACKENDS = FIXTURES / "backends"
GOLDEN = FIXTURES / "golden"
GOLDEN_ARTIFACTS = GOLDEN / "artifacts"
RUN_CFG = FIXTURES / "run.cfg"
DATA = Path(__file__).resolve().parent / "data"

FIXTURE_URLS = {cap: f"fixture://{BACKENDS}" for cap in Capability}


@pytest.fixture(autouse=True)
def _no_backend_env(monkeypatch):
    # Ambient overrides would silently reroute fixture-backed tests.
    for name in list(os.environ):
        if name.startswith("GS_BACKEND_"):
            monkeypatch.delenv(name)


@pytest.fixture(scope="session")
def fixture_gateway() -> ModelGateway:
    return ModelGateway.from_urls(FIXTURE_URLS)


@pytest.fixture(scope="session")
def golden_sentences() -> list[dict]:
    return list(read_jsonl(GOLDEN_ARTIFACTS / "01_sentences.jsonl"))


@pytest.fixture(scope="session")
def golden_sources() -> list[dict]:
    return list(read_jsonl(GOLDEN_ARTIFACTS / "02_sources.jsonl"))


@pytest.fixture(scope="session")
def golden_pairs() -> list[dict]:
    return list(read_jsonl(GOLDEN_ARTIFACTS / "03_pairs.jsonl"))


@pytest.fixture(scope="session")
def golden_records():
    return load_records(GOLDEN_ARTIFACTS / "09_records.jsonl")
