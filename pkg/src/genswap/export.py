"""Final dataset export with per-language quotas.

Positives are reviewer-accepted pairs; when more than the quota were
accepted, the earliest acceptance timestamps win (pair_id breaks ties).
Negatives are exactly the seeded sample, truncated to quota by pair_id.
Under-quota languages export everything available and flag the shortfall.
Output rows are sorted by pair_id.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

from .records import AnnotationState, ExampleRecord, Side, write_jsonl
from .textproc import detokenize

logger = logging.getLogger(__name__)

TSV_COLUMNS = (
    "source_original",
    "source_substituted",
    "translation_original",
    "translation_substituted",
    "gender_original",
    "gender_substituted",
    "label",
)


@dataclass(frozen=True)
class Quotas:
    positives: int = 100
    negatives: int = 100

    def __post_init__(self) -> None:
        if self.positives < 0 or self.negatives < 0:
            raise ValueError("quotas must be >= 0")


@dataclass(frozen=True)
class ExportReport:
    language: str
    positives: int
    negatives: int
    quotas: Quotas
    tsv_path: Path
    jsonl_path: Path

    @property
    def positive_shortfall(self) -> bool:
        return self.positives < self.quotas.positives


def _tsv_row(record: ExampleRecord, language: str) -> list[str]:
    sides = record.outcomes.get(language, {})

    def cell(side: Side) -> tuple[str, str]:
        outcome = sides.get(side)
        if outcome is None:
            return "", ""
        translation = detokenize(outcome.translation_tokens)
        gender = "" if outcome.gender is None else outcome.gender.value.value
        return translation, gender

    translation_orig, gender_orig = cell(Side.ORIGINAL)
    translation_sub, gender_sub = cell(Side.SUBSTITUTED)
    label = record.risk[language].value.value
    return [
        detokenize(record.source_original),
        detokenize(record.source_substituted),
        translation_orig,
        translation_sub,
        gender_orig,
        gender_sub,
        label,
    ]


def export_dataset(
    records: list[ExampleRecord],
    language: str,
    negative_ids: list[str],
    out_dir: Path,
    quotas: Quotas = Quotas(),
    acceptance_times: dict[str, str] | None = None,
) -> ExportReport:
    acceptance_times = acceptance_times or {}
    by_id = {record.pair_id: record for record in records}

    accepted = [
        record
        for record in records
        if record.annotation_state.get(language) is AnnotationState.ACCEPTED
    ]
    accepted.sort(key=lambda r: (acceptance_times.get(r.pair_id, ""), r.pair_id))
    positives = accepted[: quotas.positives]
    if len(positives) < quotas.positives:
        logger.warning(
            "positive quota shortfall for %s: %d of %d",
            language,
            len(positives),
            quotas.positives,
        )

    missing = [pair_id for pair_id in negative_ids if pair_id not in by_id]
    if missing:
        raise ValueError(f"sampled negatives missing from records: {missing[:3]}")
    negatives = [by_id[pair_id] for pair_id in sorted(negative_ids)]
    negatives = negatives[: quotas.negatives]

    exported = sorted(positives + negatives, key=lambda r: r.pair_id)
    out_dir.mkdir(parents=True, exist_ok=True)
    tsv_path = out_dir / f"dataset_{language}.tsv"
    jsonl_path = out_dir / f"dataset_{language}.jsonl"

    with tsv_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(TSV_COLUMNS)
        for record in exported:
            writer.writerow(_tsv_row(record, language))
    write_jsonl(jsonl_path, (record.to_json() for record in exported))

    return ExportReport(
        language=language,
        positives=len(positives),
        negatives=len(negatives),
        quotas=quotas,
        tsv_path=tsv_path,
        jsonl_path=jsonl_path,
    )
