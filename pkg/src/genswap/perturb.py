"""Perturbation engine: swap the focus token for masked-LM candidates.

Candidates are scanned in rank order up to scan_cap; a candidate is accepted
when it differs from the original focus (case-insensitive), is PERSON-tagged
at the focus position of the substituted sentence, and that sentence passes
the full source filter.  Subword fragments ("##er") and repeated surfaces
consume scan slots but never acceptance slots.  Accepted substitutes are
emitted lowercase to match the corpus.
"""

from __future__ import annotations

from dataclasses import dataclass

from .filtering import GenderedWordList, filter_sentence
from .gateway import ModelGateway
from .records import (
    PerturbedPair,
    SentenceRecord,
    SourceSentence,
    make_tokens,
    pair_id_for,
    sentence_id_for,
)

DEFAULT_SCAN_CAP = 100
DEFAULT_ACCEPT_CAP = 10


@dataclass
class PerturbReport:
    """Scan accounting; accumulates across calls when one report is shared."""

    scanned: int = 0
    fragments: int = 0
    same_as_original: int = 0
    duplicates: int = 0
    rejected_filter: int = 0
    accepted: int = 0

    def to_json(self) -> dict:
        return dict(self.__dict__)


def is_fragment(token: str) -> bool:
    """Marked continuation pieces and unusable strings."""
    if token.startswith("##"):
        return True
    return any(ch.isspace() for ch in token)


def perturb(
    source: SourceSentence,
    gateway: ModelGateway,
    lexicon: GenderedWordList,
    first_names: frozenset[str],
    scan_cap: int = DEFAULT_SCAN_CAP,
    accept_cap: int = DEFAULT_ACCEPT_CAP,
    report: PerturbReport | None = None,
) -> list[PerturbedPair]:
    if scan_cap < 1 or accept_cap < 1:
        raise ValueError("caps must be >= 1")
    report = report if report is not None else PerturbReport()
    surfaces = source.sentence.surfaces()
    candidates = gateway.fill_mask(surfaces, source.focus_index, scan_cap)

    pairs: list[PerturbedPair] = []
    seen_substitutes: set[str] = set()
    scanned = 0
    for candidate in candidates:
        if scanned >= scan_cap or len(pairs) >= accept_cap:
            break
        scanned += 1
        report.scanned += 1
        if is_fragment(candidate.token):
            report.fragments += 1
            continue
        substitute = candidate.token.lower()
        if substitute == source.focus_surface.lower():
            report.same_as_original += 1
            continue
        if substitute in seen_substitutes:
            report.duplicates += 1
            continue
        seen_substitutes.add(substitute)

        sub_surfaces = list(surfaces)
        sub_surfaces[source.focus_index] = substitute
        sub_record = SentenceRecord(
            sentence_id_for(sub_surfaces),
            source.sentence.doc_id,
            make_tokens(sub_surfaces),
        )
        ner = gateway.ner_tag(sub_surfaces)
        pos = gateway.pos_tag(sub_surfaces)
        verdict = filter_sentence(sub_record, ner, pos, lexicon, first_names)
        if (
            not isinstance(verdict, SourceSentence)
            or verdict.focus_index != source.focus_index
        ):
            report.rejected_filter += 1
            continue

        report.accepted += 1
        pairs.append(
            PerturbedPair(
                pair_id=pair_id_for(
                    source.sentence.sentence_id, source.focus_index, substitute
                ),
                base=source,
                substitute_surface=substitute,
                substituted_tokens=make_tokens(sub_surfaces),
                candidate_rank=candidate.rank,
                mlm_score=candidate.score,
            )
        )
    return pairs
