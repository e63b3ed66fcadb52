"""Review store fold semantics and the HTTP adjudication service.

Store tests exercise the fold directly; HTTP tests run a real server on an
ephemeral port against a run directory seeded from the golden artifacts.
"""

from __future__ import annotations

import http.client
import json
import random
import shutil
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import pytest
import requests

from genswap.records import (
    LANGUAGES,
    AnnotationDecision,
    AnnotationState,
    Risk,
)
from genswap.review import (
    MAX_PAGE_SIZE,
    ApiError,
    ReviewStore,
    make_server,
)

from conftest import GOLDEN_ARTIFACTS

ACCEPT = AnnotationState.ACCEPTED
FIXED = AnnotationState.REJECTED_FIXED_GENDER
OTHER = AnnotationState.REJECTED_OTHER
VERDICT_CYCLE = (ACCEPT, FIXED, OTHER)


def seed_run_dir(tmp_path: Path) -> Path:
    artifacts = tmp_path / "artifacts"
    artifacts.mkdir()
    for name in ("09_records.jsonl", "08_negatives.jsonl"):
        shutil.copy(GOLDEN_ARTIFACTS / name, artifacts / name)
    return tmp_path


@pytest.fixture()
def run_dir(tmp_path) -> Path:
    return seed_run_dir(tmp_path)


@pytest.fixture()
def store(run_dir):
    store = ReviewStore.from_run(run_dir)
    yield store
    store.close()


def decision(
    pair_id: str,
    language: str,
    verdict: AnnotationState = ACCEPT,
    annotator: str = "default",
    timestamp: str = "2026-08-19T08:00:00+00:00",
) -> AnnotationDecision:
    return AnnotationDecision(
        pair_id=pair_id,
        language=language,
        verdict=verdict,
        annotator_id=annotator,
        timestamp=timestamp,
    )


def assert_conserved(store: ReviewStore, language: str) -> None:
    progress = store.progress(language)
    assert (
        progress.accepted
        + progress.rejected_fixed
        + progress.rejected_other
        + progress.pending
        == progress.total
    )


# ---------------------------------------------------------------------------
# Store fold


def test_from_run_requires_records_artifact(tmp_path):
    with pytest.raises(FileNotFoundError, match="no records artifact"):
        ReviewStore.from_run(tmp_path)


def test_flagged_queues_match_risk_labels(store, golden_records):
    for lang in LANGUAGES:
        expected = sorted(
            record.pair_id
            for record in golden_records
            if lang in record.risk and record.risk[lang].value is Risk.AT_RISK
        )
        assert store.flagged[lang] == expected
        assert store.progress(lang).total == len(expected)
        assert store.progress(lang).pending == len(expected)
        assert store.progress(lang).to_json()["selection_rate"] is None


def test_queue_lists_pending_in_pair_id_order(store):
    first = store.queue("fr", page=1, page_size=5)
    assert first["total"] == store.progress("fr").total
    assert [item["pair_id"] for item in first["items"]] == store.flagged["fr"][:5]
    assert all(item["state"] == "PENDING" for item in first["items"])

    head = store.flagged["fr"][0]
    store.record(decision(head, "fr", verdict=OTHER))
    after = store.queue("fr", page=1, page_size=5)
    assert after["total"] == first["total"] - 1
    assert [item["pair_id"] for item in after["items"]] == store.flagged["fr"][1:6]


def test_queue_item_carries_both_sides(store):
    item = store.queue("fr", page=1, page_size=1)["items"][0]
    assert item["language"] == "fr"
    assert item["label"] == "AT_RISK"
    for side in ("original", "substituted"):
        view = item[side]
        assert view["tokens"][view["focus_index"]] == view["focus"]
        assert view["translation"] is not None
        assert view["translation"]["tokens"]
        assert view["translation"]["text"]
    assert item["original"]["focus"] != item["substituted"]["focus"]


def test_queue_pagination_windows(store):
    page2 = store.queue("de", page=2, page_size=10)
    assert [item["pair_id"] for item in page2["items"]] == store.flagged["de"][10:20]
    beyond = store.queue("de", page=1000, page_size=50)
    assert beyond["items"] == []
    assert beyond["total"] == store.progress("de").total


def test_queue_rejects_bad_inputs(store):
    with pytest.raises(ApiError) as err:
        store.queue("xx", page=1, page_size=10)
    assert (err.value.status, err.value.code) == (404, "unknown_language")
    with pytest.raises(ApiError) as err:
        store.queue("fr", page=0, page_size=10)
    assert (err.value.status, err.value.code) == (400, "bad_page")
    with pytest.raises(ApiError) as err:
        store.queue("fr", page=1, page_size=0)
    assert (err.value.status, err.value.code) == (400, "bad_page")


def test_record_rejects_unknown_and_unflagged_pairs(store, golden_records):
    with pytest.raises(ApiError) as err:
        store.record(decision("ffffffffffffffff", "fr"))
    assert (err.value.status, err.value.code) == (404, "unknown_pair")

    unflagged = next(
        record.pair_id
        for record in golden_records
        if "fr" in record.risk and record.risk["fr"].value is not Risk.AT_RISK
    )
    with pytest.raises(ApiError) as err:
        store.record(decision(unflagged, "fr"))
    assert (err.value.status, err.value.code) == (404, "not_flagged")


def test_latest_decision_per_annotator_wins(store):
    pair_id = store.flagged["es"][0]
    store.record(decision(pair_id, "es", verdict=ACCEPT))
    assert store.effective_state(pair_id, "es") is ACCEPT
    store.record(decision(pair_id, "es", verdict=OTHER))
    assert store.effective_state(pair_id, "es") is OTHER
    progress = store.progress("es")
    assert progress.accepted == 0
    assert progress.rejected_other == 1
    assert_conserved(store, "es")


def test_other_annotators_do_not_change_effective_state(store, run_dir):
    pair_id = store.flagged["ru"][0]
    store.record(decision(pair_id, "ru", verdict=ACCEPT, annotator="alex"))
    assert store.effective_state(pair_id, "ru") is AnnotationState.PENDING
    assert store.progress("ru").accepted == 0
    store.close()

    other_view = ReviewStore.from_run(run_dir, effective_annotator="alex")
    assert other_view.effective_state(pair_id, "ru") is ACCEPT
    assert other_view.progress("ru").accepted == 1
    other_view.close()


def test_progress_quota_met(run_dir):
    store = ReviewStore.from_run(run_dir, quota=2)
    try:
        ids = store.flagged["fr"][:2]
        assert store.progress("fr").to_json()["quota_met"] is False
        for pair_id in ids:
            store.record(decision(pair_id, "fr", verdict=ACCEPT))
        snapshot = store.progress("fr").to_json()
        assert snapshot["quota_met"] is True
        assert snapshot["reviewed"] == 2
        assert snapshot["selection_rate"] == 1.0
    finally:
        store.close()


def test_randomized_decisions_conserve_and_replay(store, run_dir):
    rng = random.Random(20260819)
    expected: dict[tuple[str, str], AnnotationState] = {}
    for _ in range(400):
        lang = rng.choice(LANGUAGES)
        pair_id = rng.choice(store.flagged[lang])
        verdict = rng.choice(VERDICT_CYCLE)
        store.record(decision(pair_id, lang, verdict=verdict))
        expected[(pair_id, lang)] = verdict
    for lang in LANGUAGES:
        assert_conserved(store, lang)
    before = {lang: store.progress(lang).to_json() for lang in LANGUAGES}
    store.close()

    replayed = ReviewStore.from_run(run_dir)
    try:
        for (pair_id, lang), verdict in expected.items():
            assert replayed.effective_state(pair_id, lang) is verdict
        assert {
            lang: replayed.progress(lang).to_json() for lang in LANGUAGES
        } == before
    finally:
        replayed.close()


def test_adjudicated_records_and_acceptance_times(store):
    accepted = store.flagged["fr"][:2]
    rejected = store.flagged["fr"][2]
    store.record(decision(accepted[0], "fr", ACCEPT, timestamp="2026-08-19T09:00:00+00:00"))
    store.record(decision(accepted[1], "fr", ACCEPT, timestamp="2026-08-19T09:05:00+00:00"))
    store.record(decision(rejected, "fr", FIXED, timestamp="2026-08-19T09:10:00+00:00"))

    by_id = {record.pair_id: record for record in store.adjudicated_records()}
    assert by_id[accepted[0]].annotation_state["fr"] is ACCEPT
    assert by_id[accepted[1]].annotation_state["fr"] is ACCEPT
    assert by_id[rejected].annotation_state["fr"] is FIXED
    untouched = store.flagged["fr"][3]
    assert by_id[untouched].annotation_state["fr"] is AnnotationState.PENDING

    assert store.acceptance_times("fr") == {
        accepted[0]: "2026-08-19T09:00:00+00:00",
        accepted[1]: "2026-08-19T09:05:00+00:00",
    }


# ---------------------------------------------------------------------------
# HTTP service


@contextmanager
def serve(run_dir: Path, **kwargs):
    server = make_server(run_dir, port=0, **kwargs)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    session = requests.Session()
    session.trust_env = False
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}", session, server
    finally:
        session.close()
        server.shutdown()
        server.store.close()


def raw_get(base: str, raw_path: str) -> tuple[int, bytes]:
    """GET without client-side path normalization (for traversal probes)."""
    host = base.removeprefix("http://")
    conn = http.client.HTTPConnection(host, timeout=10)
    try:
        conn.putrequest("GET", raw_path, skip_host=False)
        conn.endheaders()
        response = conn.getresponse()
        return response.status, response.read()
    finally:
        conn.close()


def test_http_queue_decision_progress_roundtrip(run_dir):
    with serve(run_dir) as (base, http_session, server):
        queue = http_session.get(f"{base}/api/queue", params={"lang": "fr"}).json()
        assert queue["page"] == 1 and queue["page_size"] == 20
        assert len(queue["items"]) == 20
        target = queue["items"][0]["pair_id"]

        posted = http_session.post(
            f"{base}/api/decision",
            json={"pair_id": target, "lang": "fr", "verdict": "ACCEPTED"},
        )
        assert posted.status_code == 200
        body = posted.json()
        assert body["accepted"] == 1
        assert body["pending"] == body["total"] - 1

        progress = http_session.get(
            f"{base}/api/progress", params={"lang": "fr"}
        ).json()
        assert progress["accepted"] == 1
        assert progress["reviewed"] == 1
        assert progress["selection_rate"] == 1.0
        assert server.store.effective_state(target, "fr") is ACCEPT

        requeued = http_session.get(
            f"{base}/api/queue", params={"lang": "fr"}
        ).json()
        assert target not in {item["pair_id"] for item in requeued["items"]}


def test_http_parameter_errors(run_dir):
    with serve(run_dir) as (base, http_session, _):
        response = http_session.get(f"{base}/api/queue")
        assert response.status_code == 400
        assert response.json()["code"] == "missing_lang"

        response = http_session.get(f"{base}/api/queue", params={"lang": "xx"})
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_language"

        response = http_session.get(
            f"{base}/api/queue", params={"lang": "fr", "page": "abc"}
        )
        assert response.status_code == 400
        assert response.json()["code"] == "bad_param"

        response = http_session.get(
            f"{base}/api/queue", params={"lang": "fr", "page": "0"}
        )
        assert response.status_code == 400
        assert response.json()["code"] == "bad_page"

        clamped = http_session.get(
            f"{base}/api/queue", params={"lang": "fr", "page_size": "100000"}
        ).json()
        assert clamped["page_size"] == MAX_PAGE_SIZE

        response = http_session.get(f"{base}/api/nope")
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_endpoint"


def test_http_decision_validation(run_dir):
    with serve(run_dir) as (base, http_session, server):
        url = f"{base}/api/decision"
        target = server.store.flagged["fr"][0]

        response = http_session.post(url, json={"pair_id": target, "lang": "fr"})
        assert response.status_code == 400
        assert response.json()["code"] == "missing_field"

        response = http_session.post(
            url, json={"pair_id": target, "lang": "fr", "verdict": "MAYBE"}
        )
        assert response.status_code == 400
        assert response.json()["code"] == "bad_verdict"

        response = http_session.post(
            url, json={"pair_id": target, "lang": "fr", "verdict": "PENDING"}
        )
        assert response.status_code == 400
        assert response.json()["code"] == "bad_verdict"

        response = http_session.post(
            url,
            data=b"{not json",
            headers={"Content-Type": "application/json"},
        )
        assert response.status_code == 400
        assert response.json()["code"] == "bad_json"

        response = http_session.post(url)
        assert response.status_code == 400
        assert response.json()["code"] == "bad_body"

        response = http_session.post(f"{base}/api/queue", json={})
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_endpoint"

        response = http_session.post(
            url, json={"pair_id": target, "lang": "fr", "verdict": "REJECTED_OTHER"}
        )
        assert response.status_code == 200


def test_http_concurrent_decisions_conserve_and_replay(run_dir):
    rng = random.Random(7)
    with serve(run_dir) as (base, _, server):
        jobs = []
        for lang in LANGUAGES:
            for pair_id in server.store.flagged[lang][:50]:
                jobs.append(
                    {
                        "pair_id": pair_id,
                        "lang": lang,
                        "verdict": rng.choice(VERDICT_CYCLE).value,
                        "annotator_id": rng.choice(("default", "default", "guest")),
                    }
                )
        rng.shuffle(jobs)

        def post(job: dict) -> int:
            # One session per call; ThreadingHTTPServer handles each
            # connection on its own thread.
            with requests.Session() as session:
                session.trust_env = False
                return session.post(f"{base}/api/decision", json=job).status_code

        with ThreadPoolExecutor(max_workers=16) as pool:
            statuses = list(pool.map(post, jobs))
        assert statuses == [200] * len(jobs)

        snapshots = {}
        for lang in LANGUAGES:
            progress = server.store.progress(lang)
            assert (
                progress.accepted
                + progress.rejected_fixed
                + progress.rejected_other
                + progress.pending
                == progress.total
            )
            snapshots[lang] = progress.to_json()
        log_lines = (
            (run_dir / "review" / "decisions.jsonl").read_text("utf-8").splitlines()
        )
        assert len(log_lines) == len(jobs)

    replayed = ReviewStore.from_run(run_dir)
    try:
        assert {
            lang: replayed.progress(lang).to_json() for lang in LANGUAGES
        } == snapshots
    finally:
        replayed.close()


def test_http_export_endpoint(run_dir, caplog):
    with serve(run_dir, quota=100) as (base, http_session, server):
        for pair_id in server.store.flagged["fr"][:2]:
            http_session.post(
                f"{base}/api/decision",
                json={"pair_id": pair_id, "lang": "fr", "verdict": "ACCEPTED"},
            )
        response = http_session.get(f"{base}/api/export", params={"lang": "fr"})
        assert response.status_code == 200
        body = response.json()
        assert body["language"] == "fr"
        assert body["positives"] == 2
        assert body["negatives"] == 100
        assert body["positive_shortfall"] is True
        for key in ("tsv", "jsonl"):
            exported = Path(body[key])
            assert exported.is_file()
            assert exported.parent == run_dir / "exports"
        rows = (
            Path(body["jsonl"]).read_text("utf-8").splitlines()
        )
        assert len(rows) == 102

        response = http_session.get(f"{base}/api/export", params={"lang": "xx"})
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_language"


def test_http_static_fallback_and_bundle(run_dir, tmp_path_factory):
    with serve(run_dir) as (base, http_session, _):
        response = http_session.get(f"{base}/")
        assert response.status_code == 200
        assert "Review service" in response.text
        assert http_session.get(f"{base}/missing.js").status_code == 404

    static_dir = tmp_path_factory.mktemp("static")
    static_dir.joinpath("index.html").write_text("<html>bundle</html>", "utf-8")
    static_dir.joinpath("app.js").write_text("console.log(1)\n", "utf-8")
    secret = static_dir.parent / "secret.txt"
    secret.write_text("keep out\n", "utf-8")

    with serve(run_dir, static_dir=static_dir) as (base, http_session, _):
        index = http_session.get(f"{base}/")
        assert index.text == "<html>bundle</html>"
        bundle = http_session.get(f"{base}/app.js")
        assert bundle.status_code == 200
        assert bundle.text == "console.log(1)\n"
        assert "javascript" in bundle.headers["Content-Type"]

        status, body = raw_get(base, "/../secret.txt")
        assert status == 404
        assert b"keep out" not in body
