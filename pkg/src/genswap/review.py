"""HTTP review service for human adjudication of flagged pairs.

State is a pure fold over an append-only decision log: each line is one
decision, fsynced on append, and the latest decision per (pair, language,
annotator) wins.  Queue and progress views derive from the fold under one
lock, so counters are linearizable and always conserve
accepted + rejected_fixed + rejected_other + pending = flagged total.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .export import Quotas, export_dataset
from .pipeline import RunPaths, load_records
from .records import (
    LANGUAGES,
    AnnotationDecision,
    AnnotationState,
    ExampleRecord,
    Risk,
    Side,
    read_jsonl,
)
from .textproc import detokenize

logger = logging.getLogger(__name__)

DEFAULT_ANNOTATOR = "default"
DEFAULT_PAGE_SIZE = 20
MAX_PAGE_SIZE = 200
MAX_BODY_BYTES = 1 << 20

VERDICTS = {
    AnnotationState.ACCEPTED,
    AnnotationState.REJECTED_FIXED_GENDER,
    AnnotationState.REJECTED_OTHER,
}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass(frozen=True)
class Progress:
    language: str
    total: int
    accepted: int
    rejected_fixed: int
    rejected_other: int
    pending: int
    quota: int

    @property
    def reviewed(self) -> int:
        return self.accepted + self.rejected_fixed + self.rejected_other

    @property
    def selection_rate(self) -> float | None:
        if self.reviewed == 0:
            return None
        return self.accepted / self.reviewed

    def to_json(self) -> dict:
        return {
            "language": self.language,
            "total": self.total,
            "accepted": self.accepted,
            "rejected_fixed": self.rejected_fixed,
            "rejected_other": self.rejected_other,
            "pending": self.pending,
            "reviewed": self.reviewed,
            "selection_rate": self.selection_rate,
            "quota": self.quota,
            "quota_met": self.accepted >= self.quota,
        }


class ReviewStore:
    """Decision log plus the in-memory fold the API reads from."""

    def __init__(
        self,
        records: list[ExampleRecord],
        log_path: Path,
        quota: int = 100,
        effective_annotator: str = DEFAULT_ANNOTATOR,
    ):
        self.records = {record.pair_id: record for record in records}
        self.log_path = log_path
        self.quota = quota
        self.effective_annotator = effective_annotator
        # Flagged pair ids per language, frozen in pair_id order.
        self.flagged: dict[str, list[str]] = {lang: [] for lang in LANGUAGES}
        for pair_id in sorted(self.records):
            for lang, label in self.records[pair_id].risk.items():
                if label.value is Risk.AT_RISK:
                    self.flagged.setdefault(lang, []).append(pair_id)
        self._decisions: dict[tuple[str, str, str], AnnotationDecision] = {}
        self._lock = threading.Lock()
        log_path.parent.mkdir(parents=True, exist_ok=True)
        if log_path.is_file():
            for row in read_jsonl(log_path):
                self._apply(AnnotationDecision.from_json(row))
        self._log = log_path.open("a", encoding="utf-8")

    @classmethod
    def from_run(
        cls,
        run_dir: Path | str,
        quota: int = 100,
        effective_annotator: str = DEFAULT_ANNOTATOR,
    ) -> "ReviewStore":
        paths = RunPaths(run_dir)
        if not paths.records().is_file():
            raise FileNotFoundError(
                f"no records artifact in run directory: {paths.records()}"
            )
        records = load_records(paths.records())
        return cls(records, paths.decisions, quota, effective_annotator)

    def close(self) -> None:
        self._log.close()

    # Fold ------------------------------------------------------------------

    def _apply(self, decision: AnnotationDecision) -> None:
        key = (decision.pair_id, decision.language, decision.annotator_id)
        self._decisions[key] = decision

    def effective_decision(
        self, pair_id: str, language: str
    ) -> AnnotationDecision | None:
        return self._decisions.get((pair_id, language, self.effective_annotator))

    def effective_state(self, pair_id: str, language: str) -> AnnotationState:
        decision = self.effective_decision(pair_id, language)
        return decision.verdict if decision else AnnotationState.PENDING

    # API operations ----------------------------------------------------------

    def record(self, decision: AnnotationDecision) -> Progress:
        record = self.records.get(decision.pair_id)
        if record is None:
            raise ApiError(404, "unknown_pair", f"no pair {decision.pair_id}")
        label = record.risk.get(decision.language)
        if label is None or label.value is not Risk.AT_RISK:
            raise ApiError(
                404,
                "not_flagged",
                f"pair {decision.pair_id} is not flagged for {decision.language}",
            )
        with self._lock:
            self._log.write(json.dumps(decision.to_json(), ensure_ascii=False) + "\n")
            self._log.flush()
            os.fsync(self._log.fileno())
            self._apply(decision)
            return self._progress_locked(decision.language)

    def queue(self, language: str, page: int, page_size: int) -> dict:
        if language not in LANGUAGES:
            raise ApiError(404, "unknown_language", f"no queue for {language!r}")
        if page < 1 or page_size < 1:
            raise ApiError(400, "bad_page", "page and page_size must be >= 1")
        with self._lock:
            pending = [
                pair_id
                for pair_id in self.flagged.get(language, [])
                if self.effective_state(pair_id, language)
                is AnnotationState.PENDING
            ]
            start = (page - 1) * page_size
            items = [
                self._render_item(pair_id, language)
                for pair_id in pending[start : start + page_size]
            ]
            return {
                "items": items,
                "total": len(pending),
                "page": page,
                "page_size": page_size,
            }

    def progress(self, language: str) -> Progress:
        with self._lock:
            return self._progress_locked(language)

    def _progress_locked(self, language: str) -> Progress:
        tallies = {state: 0 for state in AnnotationState}
        flagged = self.flagged.get(language, [])
        for pair_id in flagged:
            tallies[self.effective_state(pair_id, language)] += 1
        return Progress(
            language=language,
            total=len(flagged),
            accepted=tallies[AnnotationState.ACCEPTED],
            rejected_fixed=tallies[AnnotationState.REJECTED_FIXED_GENDER],
            rejected_other=tallies[AnnotationState.REJECTED_OTHER],
            pending=tallies[AnnotationState.PENDING],
            quota=self.quota,
        )

    def _render_item(self, pair_id: str, language: str) -> dict:
        record = self.records[pair_id]
        label = record.risk[language]

        def side_view(side: Side, tokens: list[str], focus_index: int) -> dict:
            outcome = record.outcomes.get(language, {}).get(side)
            translation = None
            if outcome is not None:
                translation = {
                    "tokens": list(outcome.translation_tokens),
                    "text": detokenize(outcome.translation_tokens),
                    "target_index": outcome.projected.target_index,
                    "gender": None
                    if outcome.gender is None
                    else outcome.gender.value.value,
                }
            return {
                "tokens": tokens,
                "text": detokenize(tokens),
                "focus_index": focus_index,
                "focus": tokens[focus_index],
                "translation": translation,
            }

        return {
            "pair_id": pair_id,
            "language": language,
            "label": label.value.value,
            "reason": label.reason,
            "original": side_view(
                Side.ORIGINAL, record.source_original, record.focus_index
            ),
            "substituted": side_view(
                Side.SUBSTITUTED, record.source_substituted, record.focus_index
            ),
            "state": self.effective_state(pair_id, language).value,
        }

    # Export ------------------------------------------------------------------

    def adjudicated_records(self) -> list[ExampleRecord]:
        """Records with annotation_state updated from the decision fold."""
        with self._lock:
            out = []
            for pair_id in sorted(self.records):
                record = self.records[pair_id]
                updated = dict(record.annotation_state)
                for lang, label in record.risk.items():
                    if label.value is Risk.AT_RISK:
                        updated[lang] = self.effective_state(pair_id, lang)
                record.annotation_state = updated
                out.append(record)
            return out

    def acceptance_times(self, language: str) -> dict[str, str]:
        with self._lock:
            times = {}
            for pair_id in self.flagged.get(language, []):
                decision = self.effective_decision(pair_id, language)
                if decision and decision.verdict is AnnotationState.ACCEPTED:
                    times[pair_id] = decision.timestamp
            return times


FALLBACK_PAGE = """<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>review service</title></head>
<body>
<h1>Review service</h1>
<p>No review UI bundle is installed. The JSON API is live:</p>
<ul>
<li>GET /api/queue?lang=fr&amp;page=1&amp;page_size=20</li>
<li>POST /api/decision {"pair_id", "lang", "verdict", "annotator_id"}</li>
<li>GET /api/progress?lang=fr</li>
<li>GET /api/export?lang=fr</li>
</ul>
</body></html>
"""


class ReviewHandler(BaseHTTPRequestHandler):
    server_version = "genswap-review/0.1"

    @property
    def store(self) -> ReviewStore:
        return self.server.store  # type: ignore[attr-defined]

    def log_message(self, fmt: str, *args) -> None:
        logger.debug("%s %s", self.address_string(), fmt % args)

    # Plumbing ----------------------------------------------------------------

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, err: ApiError) -> None:
        self._send_json(err.status, {"code": err.code, "message": err.message})

    def _query(self) -> dict[str, str]:
        params = parse_qs(urlparse(self.path).query)
        return {key: values[-1] for key, values in params.items()}

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length <= 0 or length > MAX_BODY_BYTES:
            raise ApiError(400, "bad_body", "missing or oversized request body")
        try:
            return json.loads(self.rfile.read(length).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ApiError(400, "bad_json", f"unparseable body: {exc}") from exc

    def _int_param(self, params: dict, key: str, default: int) -> int:
        try:
            return int(params.get(key, default))
        except ValueError as exc:
            raise ApiError(400, "bad_param", f"{key} must be an integer") from exc

    # Routes --------------------------------------------------------------------

    def do_GET(self) -> None:
        path = urlparse(self.path).path
        try:
            if path == "/api/queue":
                self._handle_queue()
            elif path == "/api/progress":
                self._handle_progress()
            elif path == "/api/export":
                self._handle_export()
            elif path.startswith("/api/"):
                raise ApiError(404, "unknown_endpoint", f"no endpoint {path}")
            else:
                self._handle_static(path)
        except ApiError as err:
            self._send_error_json(err)
        except Exception as exc:  # pragma: no cover - defensive
            logger.exception("unhandled error on %s", path)
            self._send_error_json(ApiError(500, "internal_error", str(exc)))

    def do_POST(self) -> None:
        path = urlparse(self.path).path
        try:
            if path == "/api/decision":
                self._handle_decision()
            else:
                raise ApiError(404, "unknown_endpoint", f"no endpoint {path}")
        except ApiError as err:
            self._send_error_json(err)
        except Exception as exc:  # pragma: no cover - defensive
            logger.exception("unhandled error on %s", path)
            self._send_error_json(ApiError(500, "internal_error", str(exc)))

    def _require_lang(self, params: dict) -> str:
        lang = params.get("lang", "")
        if not lang:
            raise ApiError(400, "missing_lang", "lang query parameter required")
        return lang

    def _handle_queue(self) -> None:
        params = self._query()
        lang = self._require_lang(params)
        page = self._int_param(params, "page", 1)
        page_size = self._int_param(params, "page_size", DEFAULT_PAGE_SIZE)
        page_size = min(page_size, MAX_PAGE_SIZE)
        self._send_json(200, self.store.queue(lang, page, page_size))

    def _handle_progress(self) -> None:
        params = self._query()
        lang = self._require_lang(params)
        self._send_json(200, self.store.progress(lang).to_json())

    def _handle_decision(self) -> None:
        body = self._read_body()
        for key in ("pair_id", "lang", "verdict"):
            if not body.get(key):
                raise ApiError(400, "missing_field", f"{key} is required")
        try:
            verdict = AnnotationState(body["verdict"])
        except ValueError:
            raise ApiError(
                400, "bad_verdict", f"unknown verdict {body['verdict']!r}"
            ) from None
        if verdict not in VERDICTS:
            raise ApiError(400, "bad_verdict", f"{verdict.value} is not recordable")
        decision = AnnotationDecision(
            pair_id=body["pair_id"],
            language=body["lang"],
            verdict=verdict,
            annotator_id=body.get("annotator_id") or self.store.effective_annotator,
            timestamp=utc_now_micro(),
        )
        progress = self.store.record(decision)
        self._send_json(200, progress.to_json())

    def _handle_export(self) -> None:
        params = self._query()
        lang = self._require_lang(params)
        if lang not in LANGUAGES:
            raise ApiError(404, "unknown_language", f"no export for {lang!r}")
        report = export_from_store(
            self.store,
            lang,
            self.server.export_dir,  # type: ignore[attr-defined]
            self.server.negatives_path,  # type: ignore[attr-defined]
            self.server.quotas,  # type: ignore[attr-defined]
        )
        self._send_json(
            200,
            {
                "language": report.language,
                "positives": report.positives,
                "negatives": report.negatives,
                "positive_shortfall": report.positive_shortfall,
                "tsv": str(report.tsv_path),
                "jsonl": str(report.jsonl_path),
            },
        )

    def _handle_static(self, path: str) -> None:
        static_dir: Path | None = self.server.static_dir  # type: ignore[attr-defined]
        if path == "/":
            path = "/index.html"
        if static_dir is not None:
            target = (static_dir / path.lstrip("/")).resolve()
            if (
                target.is_file()
                and static_dir.resolve() in target.parents
            ):
                content_type = (
                    mimetypes.guess_type(str(target))[0] or "application/octet-stream"
                )
                body = target.read_bytes()
                self.send_response(200)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
                return
        if path == "/index.html":
            body = FALLBACK_PAGE.encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "text/html; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return
        raise ApiError(404, "not_found", f"no such path: {path}")


def utc_now_micro() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def export_from_store(
    store: ReviewStore,
    language: str,
    out_dir: Path,
    negatives_path: Path | None,
    quotas: Quotas,
):
    negative_ids: list[str] = []
    if negatives_path is not None and negatives_path.is_file():
        negative_ids = [
            row["pair_id"]
            for row in read_jsonl(negatives_path)
            if row["language"] == language
        ]
    return export_dataset(
        store.adjudicated_records(),
        language,
        negative_ids,
        out_dir,
        quotas=quotas,
        acceptance_times=store.acceptance_times(language),
    )


def make_server(
    run_dir: Path | str,
    port: int = 8080,
    host: str = "127.0.0.1",
    quota: int = 100,
    quotas: Quotas | None = None,
    static_dir: Path | None = None,
    effective_annotator: str = DEFAULT_ANNOTATOR,
) -> ThreadingHTTPServer:
    paths = RunPaths(run_dir)
    store = ReviewStore.from_run(
        run_dir, quota=quota, effective_annotator=effective_annotator
    )
    server = ThreadingHTTPServer((host, port), ReviewHandler)
    server.store = store  # type: ignore[attr-defined]
    server.static_dir = static_dir  # type: ignore[attr-defined]
    server.export_dir = paths.exports_dir  # type: ignore[attr-defined]
    server.negatives_path = paths.negatives()  # type: ignore[attr-defined]
    server.quotas = quotas or Quotas(positives=quota, negatives=quota)  # type: ignore[attr-defined]
    return server
