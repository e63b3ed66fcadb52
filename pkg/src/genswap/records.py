"""Shared record types and JSON-lines helpers used across pipeline stages."""

from __future__ import annotations

import hashlib
import json
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator


LANGUAGES = ("fr", "de", "es", "ru")

# Joins token surfaces for hashing; never appears inside a token.
_ID_SEP = "\x1f"


class ConfigurationError(ValueError):
    """Bad or missing configuration (files, languages, backend urls)."""


class Gender(str, Enum):
    MASCULINE = "MASCULINE"
    FEMININE = "FEMININE"
    NEUTER = "NEUTER"
    UNKNOWN = "UNKNOWN"


class GenderEvidence(str, Enum):
    LEXICON = "LEXICON"
    DETERMINER = "DETERMINER"
    SUFFIX = "SUFFIX"
    NONE = "NONE"


class Risk(str, Enum):
    AT_RISK = "AT_RISK"
    NOT_AT_RISK = "NOT_AT_RISK"
    INDETERMINATE = "INDETERMINATE"


class Side(str, Enum):
    ORIGINAL = "ORIGINAL"
    SUBSTITUTED = "SUBSTITUTED"


class RejectReason(str, Enum):
    MULTI_PERSON = "MULTI_PERSON"
    NO_PERSON = "NO_PERSON"
    GENDERED_TERM = "GENDERED_TERM"
    NAME = "NAME"
    NOT_NOUN = "NOT_NOUN"


class AnnotationState(str, Enum):
    PENDING = "PENDING"
    ACCEPTED = "ACCEPTED"
    REJECTED_FIXED_GENDER = "REJECTED_FIXED_GENDER"
    REJECTED_OTHER = "REJECTED_OTHER"


@dataclass(frozen=True)
class Token:
    """One token of a sentence; indices are contiguous from 0."""

    surface: str
    index: int

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValueError("empty token surface")
        if any(ch.isspace() for ch in self.surface):
            raise ValueError(f"token contains whitespace: {self.surface!r}")
        if self.index < 0:
            raise ValueError("negative token index")


def make_tokens(surfaces: Iterable[str]) -> tuple[Token, ...]:
    return tuple(Token(s, i) for i, s in enumerate(surfaces))


def sentence_id_for(surfaces: Iterable[str]) -> str:
    """Stable id: hex digest of the NFC-normalized joined token sequence."""
    key = _ID_SEP.join(unicodedata.normalize("NFC", s) for s in surfaces)
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class SentenceRecord:
    """Tokenized sentence with a deterministic id."""

    sentence_id: str
    doc_id: str
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("sentence with no tokens")
        for want, tok in enumerate(self.tokens):
            if tok.index != want:
                raise ValueError("token indices not contiguous from 0")

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def to_json(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "doc_id": self.doc_id,
            "tokens": self.surfaces(),
        }

    @classmethod
    def from_json(cls, row: dict) -> "SentenceRecord":
        return cls(row["sentence_id"], row["doc_id"], make_tokens(row["tokens"]))

    @classmethod
    def from_surfaces(cls, doc_id: str, surfaces: Iterable[str]) -> "SentenceRecord":
        surfaces = list(surfaces)
        return cls(sentence_id_for(surfaces), doc_id, make_tokens(surfaces))


@dataclass(frozen=True)
class SourceSentence:
    """Accepted sentence with its single person-entity token (the focus)."""

    sentence: SentenceRecord
    focus_index: int
    focus_surface: str

    def __post_init__(self) -> None:
        if not (0 <= self.focus_index < len(self.sentence.tokens)):
            raise ValueError("focus index out of range")
        if self.sentence.tokens[self.focus_index].surface != self.focus_surface:
            raise ValueError("focus surface does not match token at focus index")


@dataclass(frozen=True)
class PerturbedPair:
    """Minimal pair: the base sentence plus a one-token substitution."""

    pair_id: str
    base: SourceSentence
    substitute_surface: str
    substituted_tokens: tuple[Token, ...]
    candidate_rank: int
    mlm_score: float

    def __post_init__(self) -> None:
        base_tokens = self.base.sentence.tokens
        if len(self.substituted_tokens) != len(base_tokens):
            raise ValueError("substituted token count differs from base")
        diff = [
            i
            for i, (a, b) in enumerate(zip(base_tokens, self.substituted_tokens))
            if a.surface != b.surface
        ]
        if diff != [self.base.focus_index]:
            raise ValueError("pair must differ exactly at the focus index")
        if self.substitute_surface.lower() == self.base.focus_surface.lower():
            raise ValueError("substitute equals the original focus")


def pair_id_for(sentence_id: str, focus_index: int, substitute: str) -> str:
    key = f"{sentence_id}{_ID_SEP}{focus_index}{_ID_SEP}{substitute}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class ProjectedFocus:
    """Target-side position of the source focus, or nothing."""

    target_index: int | None
    posterior: float | None

    def __post_init__(self) -> None:
        if (self.target_index is None) != (self.posterior is None):
            raise ValueError("posterior present iff target_index present")


@dataclass(frozen=True)
class GenderTag:
    value: Gender
    evidence: GenderEvidence

    def __post_init__(self) -> None:
        unknown = self.value is Gender.UNKNOWN
        if unknown != (self.evidence is GenderEvidence.NONE):
            raise ValueError("UNKNOWN iff evidence NONE")


@dataclass(frozen=True)
class TranslationOutcome:
    """One translated side of a pair in one target language."""

    pair_id: str
    side: Side
    target_language: str
    translation_tokens: tuple[str, ...]
    projected: ProjectedFocus
    gender: GenderTag | None

    def __post_init__(self) -> None:
        if (self.projected.target_index is None) != (self.gender is None):
            raise ValueError("gender present iff projection present")

    def to_json(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "side": self.side.value,
            "lang": self.target_language,
            "translation_tokens": list(self.translation_tokens),
            "target_index": self.projected.target_index,
            "posterior": self.projected.posterior,
            "gender": None if self.gender is None else self.gender.value.value,
            "evidence": None if self.gender is None else self.gender.evidence.value,
        }

    @classmethod
    def from_json(cls, row: dict) -> "TranslationOutcome":
        gender = None
        if row["gender"] is not None:
            gender = GenderTag(Gender(row["gender"]), GenderEvidence(row["evidence"]))
        return cls(
            pair_id=row["pair_id"],
            side=Side(row["side"]),
            target_language=row["lang"],
            translation_tokens=tuple(row["translation_tokens"]),
            projected=ProjectedFocus(row["target_index"], row["posterior"]),
            gender=gender,
        )


@dataclass(frozen=True)
class RiskLabel:
    value: Risk
    reason: str

    def __post_init__(self) -> None:
        if self.value is Risk.INDETERMINATE:
            if self.reason not in ("UNPROJECTED", "UNKNOWN_GENDER"):
                raise ValueError(f"bad INDETERMINATE reason: {self.reason}")


@dataclass(frozen=True)
class FormRatio:
    """Masculine-vs-feminine tally for one English reference form."""

    form: str
    language: str
    masculine_count: int
    feminine_count: int

    def __post_init__(self) -> None:
        if self.masculine_count < 0 or self.feminine_count < 0:
            raise ValueError("negative tally")

    @property
    def ratio_display(self) -> str:
        return f"{self.masculine_count}:{self.feminine_count}"

    @property
    def total(self) -> int:
        return self.masculine_count + self.feminine_count


@dataclass(frozen=True)
class AnnotationDecision:
    pair_id: str
    language: str
    verdict: AnnotationState
    annotator_id: str
    timestamp: str

    def __post_init__(self) -> None:
        if self.verdict is AnnotationState.PENDING:
            raise ValueError("PENDING is not a recordable verdict")

    def to_json(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "lang": self.language,
            "verdict": self.verdict.value,
            "annotator_id": self.annotator_id,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, row: dict) -> "AnnotationDecision":
        return cls(
            pair_id=row["pair_id"],
            language=row["lang"],
            verdict=AnnotationState(row["verdict"]),
            annotator_id=row["annotator_id"],
            timestamp=row["timestamp"],
        )


@dataclass
class ExampleRecord:
    """A pair with all per-language outcomes, risk labels, and review state."""

    pair_id: str
    sentence_id: str
    focus_index: int
    source_original: list[str]
    source_substituted: list[str]
    original_surface: str
    substitute_surface: str
    outcomes: dict  # lang -> {side -> TranslationOutcome}
    risk: dict  # lang -> RiskLabel
    annotation_state: dict = field(default_factory=dict)  # lang -> AnnotationState
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "sentence_id": self.sentence_id,
            "focus_index": self.focus_index,
            "source_original": self.source_original,
            "source_substituted": self.source_substituted,
            "original_surface": self.original_surface,
            "substitute_surface": self.substitute_surface,
            "outcomes": {
                lang: {side.value: out.to_json() for side, out in sides.items()}
                for lang, sides in self.outcomes.items()
            },
            "risk": {
                lang: {"label": label.value.value, "reason": label.reason}
                for lang, label in self.risk.items()
            },
            "annotation_state": {
                lang: state.value for lang, state in self.annotation_state.items()
            },
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, row: dict) -> "ExampleRecord":
        return cls(
            pair_id=row["pair_id"],
            sentence_id=row["sentence_id"],
            focus_index=row["focus_index"],
            source_original=list(row["source_original"]),
            source_substituted=list(row["source_substituted"]),
            original_surface=row["original_surface"],
            substitute_surface=row["substitute_surface"],
            outcomes={
                lang: {
                    Side(side): TranslationOutcome.from_json(out)
                    for side, out in sides.items()
                }
                for lang, sides in row["outcomes"].items()
            },
            risk={
                lang: RiskLabel(Risk(val["label"]), val["reason"])
                for lang, val in row["risk"].items()
            },
            annotation_state={
                lang: AnnotationState(state)
                for lang, state in row.get("annotation_state", {}).items()
            },
            provenance=dict(row.get("provenance", {})),
        )


def write_jsonl(path: Path | str, rows: Iterable[dict]) -> int:
    """Write rows as JSON-lines; returns the number of rows written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def read_jsonl(path: Path | str) -> Iterator[dict]:
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
