"""Wire protocol for the four model capabilities the pipeline consumes.

Every capability is an HTTP POST with a JSON body:

    /ner        {"tokens": [...]}                       -> {"spans": [{"token_index", "label"}]}
    /pos        {"tokens": [...]}                       -> {"tags": [...]}
    /fill_mask  {"tokens": [...], "mask_index", "top_k"} -> {"candidates": [{"token", "score", "rank"}]}
    /translate  {"text": ..., "target_language": ...}   -> {"text": ...}

Errors carry {"code": ..., "message": ...} with an HTTP status >= 400.
Request digests (sha256 over the canonical JSON body) key both the response
cache and the fixture files, so a recorded cache doubles as a fixture set.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence


class Capability(str, Enum):
    NER = "ner"
    POS = "pos"
    FILL_MASK = "fill_mask"
    TRANSLATE = "translate"

    @property
    def path(self) -> str:
        return f"/{self.value}"


UPOS_TAGS = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
}

NER_LABELS = {"PERSON", "OTHER"}


class ProtocolError(ValueError):
    """A response that does not conform to the wire protocol."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True)
class NerSpan:
    token_index: int
    label: str


@dataclass(frozen=True)
class MaskCandidate:
    token: str
    score: float
    rank: int


def canonical_body(body: dict) -> bytes:
    """Canonical JSON encoding used for request digests."""
    return json.dumps(
        body, sort_keys=True, ensure_ascii=False, separators=(",", ":")
    ).encode("utf-8")


def request_digest(body: dict) -> str:
    return hashlib.sha256(canonical_body(body)).hexdigest()


def ner_request(tokens: Sequence[str]) -> dict:
    return {"tokens": list(tokens)}


def pos_request(tokens: Sequence[str]) -> dict:
    return {"tokens": list(tokens)}


def fill_mask_request(tokens: Sequence[str], mask_index: int, top_k: int) -> dict:
    return {"tokens": list(tokens), "mask_index": mask_index, "top_k": top_k}


def translate_request(text: str, target_language: str) -> dict:
    return {"text": text, "target_language": target_language}


def parse_ner_response(body: dict, n_tokens: int) -> list[NerSpan]:
    spans = body.get("spans")
    if not isinstance(spans, list):
        raise ProtocolError("protocol", "ner response missing 'spans' list")
    seen: set[int] = set()
    out: list[NerSpan] = []
    for span in spans:
        idx = span.get("token_index")
        label = span.get("label")
        if not isinstance(idx, int) or not (0 <= idx < n_tokens):
            raise ProtocolError("protocol", f"ner span index out of bounds: {idx!r}")
        if label not in NER_LABELS:
            raise ProtocolError("protocol", f"ner label outside enum: {label!r}")
        if idx in seen:
            raise ProtocolError("protocol", f"duplicate ner span for token {idx}")
        seen.add(idx)
        out.append(NerSpan(idx, label))
    return out


def parse_pos_response(body: dict, n_tokens: int) -> list[str]:
    tags = body.get("tags")
    if not isinstance(tags, list) or len(tags) != n_tokens:
        raise ProtocolError("protocol", "pos response must tag every token")
    for tag in tags:
        if tag not in UPOS_TAGS:
            raise ProtocolError("protocol", f"pos tag outside tag set: {tag!r}")
    return list(tags)


def parse_fill_mask_response(body: dict, top_k: int) -> list[MaskCandidate]:
    candidates = body.get("candidates")
    if not isinstance(candidates, list):
        raise ProtocolError("protocol", "fill_mask response missing 'candidates'")
    if len(candidates) > top_k:
        raise ProtocolError("protocol", f"more than top_k={top_k} candidates")
    out: list[MaskCandidate] = []
    prev_rank = 0
    prev_score = 1.0
    for cand in candidates:
        token = cand.get("token")
        score = cand.get("score")
        rank = cand.get("rank")
        if not isinstance(token, str) or not token:
            raise ProtocolError("protocol", f"bad candidate token: {token!r}")
        if not isinstance(score, (int, float)) or not (0.0 < score <= 1.0):
            raise ProtocolError("protocol", f"candidate score outside (0,1]: {score!r}")
        if not isinstance(rank, int) or rank <= prev_rank:
            raise ProtocolError("protocol", f"ranks must increase strictly: {rank!r}")
        if score > prev_score:
            raise ProtocolError("protocol", "scores must be non-increasing with rank")
        prev_rank = rank
        prev_score = float(score)
        out.append(MaskCandidate(token, float(score), rank))
    return out


def parse_translate_response(body: dict) -> str:
    text = body.get("text")
    if not isinstance(text, str) or not text:
        raise ProtocolError("protocol", "translate response must carry non-empty text")
    return text


def parse_error_response(body: dict) -> tuple[str, str]:
    code = body.get("code")
    message = body.get("message")
    if not isinstance(code, str) or not isinstance(message, str):
        raise ProtocolError("protocol", "error body must carry {code, message}")
    return code, message
