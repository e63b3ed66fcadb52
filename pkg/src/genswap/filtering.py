"""Source filter: keep sentences with exactly one gender-neutral person noun.

A sentence is accepted iff (a) NER marks exactly one token PERSON, (b) that
token's POS is NOUN, (c) its lowercase surface is not in the gendered-word
list, and (d) it is not name-flagged (capitalized mid-sentence, or in the
bundled first-name list).  Rejections carry exactly one reason under the
fixed precedence MULTI_PERSON > NO_PERSON > GENDERED_TERM > NAME > NOT_NOUN.

Plural person nouns ("parents", "employees") pass; the filter deliberately
has no plural rule.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .protocol import NerSpan
from .records import (
    ConfigurationError,
    RejectReason,
    SentenceRecord,
    SourceSentence,
)

DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class GenderedWordList:
    entries: frozenset[str]
    provenance: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ConfigurationError("gendered word list is empty")
        bad = [e for e in self.entries if e != e.lower()]
        if bad:
            raise ConfigurationError(f"non-lowercase entries: {bad[:3]}")


@dataclass(frozen=True)
class Rejection:
    sentence_id: str
    reason: RejectReason


@dataclass
class FilterReport:
    """Funnel accounting: accepted + per-reason rejects = input count."""

    accepted: int = 0
    rejected: dict = field(
        default_factory=lambda: {reason.value: 0 for reason in RejectReason}
    )

    @property
    def total(self) -> int:
        return self.accepted + sum(self.rejected.values())

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "rejected": dict(self.rejected)}


def _read_wordfile(path: Path) -> list[str]:
    if not path.is_file():
        raise ConfigurationError(f"word list not found: {path}")
    if path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise ConfigurationError(f"expected a JSON array in {path}")
        words = [str(w) for w in data]
    else:
        words = []
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                words.append(line)
    if not words:
        raise ConfigurationError(f"word list is empty: {path}")
    return words


def load_gendered_list(paths: Sequence[Path | str]) -> GenderedWordList:
    """Lowercased union of the given word-list files."""
    if not paths:
        raise ConfigurationError("no gendered word list configured")
    entries: set[str] = set()
    provenance: list[str] = []
    for path in paths:
        path = Path(path)
        entries.update(w.lower() for w in _read_wordfile(path))
        provenance.append(path.name)
    return GenderedWordList(frozenset(entries), tuple(provenance))


def load_first_names(path: Path | str) -> frozenset[str]:
    return frozenset(w.lower() for w in _read_wordfile(Path(path)))


def default_gendered_paths() -> list[Path]:
    return [
        DATA_DIR / "wordlists" / "gendered_terms_core.txt",
        DATA_DIR / "wordlists" / "gendered_terms_extended.txt",
    ]


def default_first_names_path() -> Path:
    return DATA_DIR / "wordlists" / "first_names.txt"


def is_name_flagged(surface: str, index: int, first_names: frozenset[str]) -> bool:
    if index > 0 and surface[:1].isupper():
        return True
    return surface.lower() in first_names


def filter_sentence(
    record: SentenceRecord,
    ner: Iterable[NerSpan],
    pos: Sequence[str],
    lexicon: GenderedWordList,
    first_names: frozenset[str],
) -> SourceSentence | Rejection:
    """Apply the acceptance rule; never both accepts and rejects."""
    if len(pos) != len(record.tokens):
        raise ValueError(
            f"pos tags ({len(pos)}) do not match tokens ({len(record.tokens)}) "
            f"for sentence {record.sentence_id}"
        )
    person_indices = sorted(
        span.token_index for span in ner if span.label == "PERSON"
    )
    for idx in person_indices:
        if not 0 <= idx < len(record.tokens):
            raise ValueError(f"ner span out of bounds for {record.sentence_id}")

    if len(person_indices) > 1:
        return Rejection(record.sentence_id, RejectReason.MULTI_PERSON)
    if not person_indices:
        return Rejection(record.sentence_id, RejectReason.NO_PERSON)

    focus = person_indices[0]
    surface = record.tokens[focus].surface
    if surface.lower() in lexicon.entries:
        return Rejection(record.sentence_id, RejectReason.GENDERED_TERM)
    if is_name_flagged(surface, focus, first_names):
        return Rejection(record.sentence_id, RejectReason.NAME)
    if pos[focus] != "NOUN":
        return Rejection(record.sentence_id, RejectReason.NOT_NOUN)
    return SourceSentence(record, focus, surface)
