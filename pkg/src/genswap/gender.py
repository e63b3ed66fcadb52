"""Layered grammatical-gender tagger for fr/de/es/ru target tokens.

Resolution order per token: lexicon on the exact surface, lexicon on the
casefolded (diacritic-preserving) form, nearest gender-marked determiner
among the three preceding tokens, then suffix rules, then UNKNOWN.  French
apostrophe-bound articles ("l'expert") are split off before lookup; the
elided article itself marks no gender.  Russian has no articles, so its
determiner layer is empty and case-inflected surfaces are carried by the
lexicon plus "-а/-я" (feminine-leaning) and consonant-ending
(masculine-leaning) suffix rules at low priority.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .records import ConfigurationError, Gender, GenderEvidence, GenderTag, LANGUAGES

DATA_DIR = Path(__file__).parent / "data"

DETERMINER_WINDOW = 3

_GENDER_BY_LETTER = {
    "M": Gender.MASCULINE,
    "F": Gender.FEMININE,
    "N": Gender.NEUTER,
}

# Gender-marked determiners/articles per language; None marks an article
# that is recognized but carries no gender (it never blocks the scan).
DETERMINERS: dict[str, dict[str, Gender | None]] = {
    "fr": {
        "le": Gender.MASCULINE, "un": Gender.MASCULINE, "du": Gender.MASCULINE,
        "au": Gender.MASCULINE, "ce": Gender.MASCULINE, "cet": Gender.MASCULINE,
        "mon": Gender.MASCULINE, "ton": Gender.MASCULINE, "son": Gender.MASCULINE,
        "la": Gender.FEMININE, "une": Gender.FEMININE, "cette": Gender.FEMININE,
        "ma": Gender.FEMININE, "ta": Gender.FEMININE, "sa": Gender.FEMININE,
        "les": None, "des": None, "l'": None, "de": None,
        "mes": None, "tes": None, "ses": None, "leur": None, "leurs": None,
    },
    "de": {
        "der": Gender.MASCULINE, "den": Gender.MASCULINE,
        "einen": Gender.MASCULINE, "jeder": Gender.MASCULINE,
        "dieser": Gender.MASCULINE,
        "die": Gender.FEMININE, "eine": Gender.FEMININE,
        "einer": Gender.FEMININE, "jede": Gender.FEMININE,
        "diese": Gender.FEMININE, "keine": Gender.FEMININE,
        "meine": Gender.FEMININE, "seine": Gender.FEMININE,
        "das": Gender.NEUTER, "jedes": Gender.NEUTER, "dieses": Gender.NEUTER,
        "ein": None, "einem": None, "dem": None, "des": None,
        "kein": None, "mein": None, "sein": None,
    },
    "es": {
        "el": Gender.MASCULINE, "un": Gender.MASCULINE, "los": Gender.MASCULINE,
        "unos": Gender.MASCULINE, "este": Gender.MASCULINE, "ese": Gender.MASCULINE,
        "al": Gender.MASCULINE, "del": Gender.MASCULINE,
        "la": Gender.FEMININE, "una": Gender.FEMININE, "las": Gender.FEMININE,
        "unas": Gender.FEMININE, "esta": Gender.FEMININE, "esa": Gender.FEMININE,
        "mi": None, "su": None, "sus": None, "de": None,
    },
    "ru": {},
}

# French elided articles/particles split off before lookup.
_FR_ELISIONS = ("l'", "d'", "j'", "qu'", "c'", "s'", "t'", "m'", "n'")


@dataclass(frozen=True)
class SuffixRule:
    language: str
    suffix: str
    gender: Gender
    priority: int


@dataclass
class GenderLexicon:
    language: str
    entries: dict[str, Gender]
    sources: list[str]


def _casefold(surface: str) -> str:
    return unicodedata.normalize("NFC", surface).casefold()


def load_lexicon(language: str, paths: Sequence[Path | str]) -> GenderLexicon:
    """Parse `surface<TAB>{M|F|N}` files; later files override earlier."""
    if not paths:
        raise ConfigurationError(f"no lexicon files configured for {language}")
    entries: dict[str, Gender] = {}
    sources: list[str] = []
    for path in paths:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"lexicon not found: {path}")
        sources.append(path.name)
        for lineno, line in enumerate(
            path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1] not in _GENDER_BY_LETTER:
                raise ConfigurationError(f"{path}:{lineno}: malformed lexicon line")
            entries[_casefold(parts[0])] = _GENDER_BY_LETTER[parts[1]]
    if not entries:
        raise ConfigurationError(f"empty lexicon for {language}")
    return GenderLexicon(language, entries, sources)


def load_suffix_rules(language: str, path: Path | str) -> list[SuffixRule]:
    """Parse `suffix<TAB>{M|F|N}<TAB>priority` lines."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"suffix rules not found: {path}")
    rules: list[SuffixRule] = []
    for lineno, line in enumerate(
        path.read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[1] not in _GENDER_BY_LETTER:
            raise ConfigurationError(f"{path}:{lineno}: malformed suffix rule")
        rules.append(
            SuffixRule(language, parts[0], _GENDER_BY_LETTER[parts[1]], int(parts[2]))
        )
    # longer suffix wins at equal priority
    rules.sort(key=lambda r: (-r.priority, -len(r.suffix), r.suffix))
    return rules


def default_lexicon_paths(language: str) -> list[Path]:
    return [DATA_DIR / "lexicons" / f"{language}.tsv"]


def default_rules_path(language: str) -> Path:
    return DATA_DIR / "rules" / f"{language}_suffixes.tsv"


class GenderTagger:
    """Immutable after construction; tagging is pure."""

    def __init__(
        self,
        language: str,
        lexicon: GenderLexicon | None = None,
        rules: list[SuffixRule] | None = None,
    ):
        if language not in LANGUAGES:
            raise ConfigurationError(f"unsupported language: {language}")
        self.language = language
        self.lexicon = (
            lexicon
            if lexicon is not None
            else load_lexicon(language, default_lexicon_paths(language))
        )
        self.rules = (
            rules
            if rules is not None
            else load_suffix_rules(language, default_rules_path(language))
        )
        self.determiners = DETERMINERS[language]

    def tag(self, tokens: Sequence[str], index: int) -> GenderTag:
        if not 0 <= index < len(tokens):
            raise ValueError(f"target index {index} out of range")
        surface = tokens[index]
        article = None
        if self.language == "fr":
            article, surface = _split_elision(surface)

        gender = self.lexicon.entries.get(_casefold(surface))
        if gender is not None:
            return GenderTag(gender, GenderEvidence.LEXICON)

        gender = self._determiner_gender(tokens, index, article)
        if gender is not None:
            return GenderTag(gender, GenderEvidence.DETERMINER)

        gender = self._suffix_gender(surface)
        if gender is not None:
            return GenderTag(gender, GenderEvidence.SUFFIX)

        return GenderTag(Gender.UNKNOWN, GenderEvidence.NONE)

    def _determiner_gender(
        self, tokens: Sequence[str], index: int, article: str | None
    ) -> Gender | None:
        candidates: list[str] = []
        if article is not None:
            candidates.append(article)
        lo = max(0, index - DETERMINER_WINDOW)
        candidates.extend(tokens[i] for i in range(index - 1, lo - 1, -1))
        for candidate in candidates:
            gender = self.determiners.get(_casefold(candidate))
            if gender is not None:
                return gender
        return None

    def _suffix_gender(self, surface: str) -> Gender | None:
        folded = _casefold(surface)
        for rule in self.rules:  # pre-sorted: priority desc, length desc
            if len(folded) > len(rule.suffix) and folded.endswith(rule.suffix):
                return rule.gender
        return None


def _split_elision(surface: str) -> tuple[str | None, str]:
    lowered = surface.lower()
    for prefix in _FR_ELISIONS:
        if lowered.startswith(prefix) and len(surface) > len(prefix):
            return surface[: len(prefix)], surface[len(prefix) :]
    return None, surface


def tag_gender(
    language: str, tokens: Sequence[str], index: int, tagger: GenderTagger | None = None
) -> GenderTag:
    """Convenience wrapper constructing a default tagger per call."""
    tagger = tagger or GenderTagger(language)
    return tagger.tag(tokens, index)
