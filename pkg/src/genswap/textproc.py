"""Corpus ingestion: segmentation, tokenization, dedup, stable sentence ids.

Rules are deliberately simple and auditable:
  - sentences split on ".", "!", "?" followed by whitespace (or end of text),
    guarded by a small abbreviation list so "m.d." does not split;
  - tokens are whitespace chunks with leading/trailing punctuation detached
    one character at a time; hyphenated words and internal apostrophes or
    periods ("don't", "m.d") stay whole;
  - no lowercasing anywhere (capitalization feeds name detection later).

Joining token surfaces with single spaces and re-tokenizing yields the same
sequence, which makes ingest idempotent over its own output.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .records import SentenceRecord, make_tokens, sentence_id_for

DEFAULT_MAX_TOKENS = 128

# Words before a "." that do not end a sentence.
ABBREVIATIONS = {
    "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr",
    "etc", "e.g", "i.e", "vs", "approx",
    "m.d", "ph.d", "b.a", "u.s", "u.k",
}

_TERMINATORS = ".!?"

# Detokenization spacing: closers attach left, openers attach right.
_NO_SPACE_BEFORE = set(".,!?;:)]}%»…'\"")
_NO_SPACE_AFTER = set("([{«")


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    text: str
    source_tag: str


@dataclass
class IngestConfig:
    max_tokens: int = DEFAULT_MAX_TOKENS


@dataclass
class IngestReport:
    """Funnel counters for one ingest pass."""

    documents: int = 0
    undecodable: int = 0
    empty: int = 0
    sentences: int = 0
    dropped_long: int = 0
    duplicates: int = 0
    emitted: int = 0

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Whitespace split, then detach leading/trailing punctuation."""
    tokens: list[str] = []
    for chunk in text.split():
        lead: list[str] = []
        trail: list[str] = []
        while len(chunk) > 1 and _is_punct(chunk[0]):
            lead.append(chunk[0])
            chunk = chunk[1:]
        while len(chunk) > 1 and _is_punct(chunk[-1]):
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


def detokenize(tokens: Iterable[str]) -> str:
    """Join tokens into natural text (inverse of tokenize up to whitespace)."""
    out: list[str] = []
    for tok in tokens:
        if out and not (
            (len(tok) == 1 and tok in _NO_SPACE_BEFORE)
            or (len(out[-1]) == 1 and out[-1] in _NO_SPACE_AFTER)
        ):
            out.append(" ")
        out.append(tok)
    return "".join(out)


def _word_before(text: str, pos: int) -> str:
    """The whitespace-delimited chunk ending just before text[pos], lowercased."""
    start = pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:pos].lower()


def segment(text: str) -> list[str]:
    """Split text into sentence strings (terminators kept)."""
    sentences: list[str] = []
    start = 0
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        at_boundary = i + 1 == len(text) or text[i + 1].isspace()
        if not at_boundary:
            continue
        if ch == "." and _word_before(text, i) in ABBREVIATIONS:
            continue
        piece = text[start : i + 1].strip()
        if piece:
            sentences.append(piece)
        start = i + 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def ingest(
    documents: Iterable[RawDocument],
    config: IngestConfig | None = None,
    report: IngestReport | None = None,
) -> Iterator[SentenceRecord]:
    """Segment, tokenize, and dedup documents into SentenceRecords.

    Output order is deterministic given input order; duplicates (identical
    normalized token sequences) are emitted once, first occurrence wins.
    """
    config = config or IngestConfig()
    report = report if report is not None else IngestReport()
    seen: set[str] = set()
    for doc in documents:
        report.documents += 1
        if not doc.text.strip():
            report.empty += 1
            continue
        for sentence_text in segment(doc.text):
            tokens = tokenize(sentence_text)
            if not tokens:
                continue
            report.sentences += 1
            if len(tokens) > config.max_tokens:
                report.dropped_long += 1
                continue
            sid = sentence_id_for(tokens)
            if sid in seen:
                report.duplicates += 1
                continue
            seen.add(sid)
            report.emitted += 1
            yield SentenceRecord(sid, doc.doc_id, make_tokens(tokens))


def iter_documents(
    path: Path | str, fmt: str, report: IngestReport | None = None
) -> Iterator[RawDocument]:
    """Read documents from a txt (one per line) or jsonl file.

    Undecodable lines are skipped and counted rather than aborting the run.
    """
    import json

    path = Path(path)
    raw_lines = path.read_bytes().split(b"\n")
    # A trailing newline leaves one empty chunk; it is not a document.
    if raw_lines and not raw_lines[-1]:
        raw_lines.pop()
    for lineno, raw in enumerate(raw_lines, start=1):
        if not raw.strip():
            if fmt == "txt":
                yield RawDocument(f"{path.name}:{lineno}", "", path.name)
            continue
        try:
            line = raw.decode("utf-8")
        except UnicodeDecodeError:
            if report is not None:
                report.undecodable += 1
            continue
        if fmt == "txt":
            yield RawDocument(f"{path.name}:{lineno}", line, path.name)
        elif fmt == "jsonl":
            row = json.loads(line)
            yield RawDocument(
                str(row["doc_id"]), row["text"], row.get("source_tag", path.name)
            )
        else:
            raise ValueError(f"unknown input format: {fmt}")
