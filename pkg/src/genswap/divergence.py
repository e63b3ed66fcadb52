"""Divergence detection: compare translated genders across a minimal pair.

A pair is flagged for a language when both translations project the focus,
both genders are resolvable, and the genders differ.  Neuter counts as a
divergent pole only where the language's gender system has one; elsewhere a
neuter reading is treated as unresolvable.  Matching neuter readings are
non-divergent everywhere.
"""

from __future__ import annotations

import hashlib
import random

from .records import (
    Gender,
    PerturbedPair,
    Risk,
    RiskLabel,
    TranslationOutcome,
)

REASON_UNPROJECTED = "UNPROJECTED"
REASON_UNKNOWN_GENDER = "UNKNOWN_GENDER"
REASON_DIVERGENT = "GENDERS_DIFFER"
REASON_AGREEING = "GENDERS_AGREE"

# Genders a tagger can meaningfully resolve per target language.
KNOWN_GENDERS: dict[str, frozenset[Gender]] = {
    "fr": frozenset({Gender.MASCULINE, Gender.FEMININE}),
    "es": frozenset({Gender.MASCULINE, Gender.FEMININE}),
    "ru": frozenset({Gender.MASCULINE, Gender.FEMININE}),
    "de": frozenset({Gender.MASCULINE, Gender.FEMININE, Gender.NEUTER}),
}


def classify(
    original: TranslationOutcome, substituted: TranslationOutcome
) -> RiskLabel:
    """Symmetric and total: every outcome pair maps to exactly one label."""
    if original.pair_id != substituted.pair_id:
        raise ValueError("outcomes belong to different pairs")
    if original.target_language != substituted.target_language:
        raise ValueError("outcomes belong to different languages")
    language = original.target_language

    if original.gender is None or substituted.gender is None:
        return RiskLabel(Risk.INDETERMINATE, REASON_UNPROJECTED)

    first, second = original.gender.value, substituted.gender.value
    if first is Gender.UNKNOWN or second is Gender.UNKNOWN:
        return RiskLabel(Risk.INDETERMINATE, REASON_UNKNOWN_GENDER)
    if first is Gender.NEUTER and second is Gender.NEUTER:
        return RiskLabel(Risk.NOT_AT_RISK, REASON_AGREEING)
    known = KNOWN_GENDERS[language]
    if first not in known or second not in known:
        return RiskLabel(Risk.INDETERMINATE, REASON_UNKNOWN_GENDER)
    if first is second:
        return RiskLabel(Risk.NOT_AT_RISK, REASON_AGREEING)
    return RiskLabel(Risk.AT_RISK, REASON_DIVERGENT)


def negative_seed(base_seed: int, language: str) -> int:
    """Stable per-language stream derived from the run seed."""
    digest = hashlib.sha256(f"{base_seed}:{language}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def sample_negatives(
    pairs: list[PerturbedPair], n: int, seed: int
) -> list[PerturbedPair]:
    """Draw min(n, len(pairs)) pairs without replacement, deterministically.

    The population is ordered by pair_id before drawing so the result depends
    only on membership and seed, not on caller ordering.
    """
    if n < 0:
        raise ValueError("sample size must be >= 0")
    population = sorted(pairs, key=lambda p: p.pair_id)
    k = min(n, len(population))
    return random.Random(seed).sample(population, k)
