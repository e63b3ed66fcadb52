"""Model adapters: the linguistics behind the four protocol endpoints.

Two implementations of the same small interface.  RuleAdapter computes
everything from closed word tables, so it is fully deterministic and
needs no weights; it backs the test suite and local demos.
TransformersAdapter wraps pretrained checkpoints for live data and
refuses to construct (with a diagnostic) when a model cannot load.
"""

from __future__ import annotations

import hashlib
import json
import unicodedata
from abc import ABC, abstractmethod

LANGUAGES = ("fr", "de", "es", "ru")


class ModelLoadError(RuntimeError):
    """A configured model could not be loaded; the server must not start."""


class Adapter(ABC):
    """One object per server; handlers call it from worker threads, so
    implementations must be read-only after construction."""

    name: str

    @abstractmethod
    def identity(self, capability: str) -> str:
        """Stable "model@digest" string advertised in response headers."""

    @abstractmethod
    def ner(self, tokens: list[str]) -> list[dict]:
        """Spans [{token_index, label}] with label PERSON or OTHER."""

    @abstractmethod
    def pos(self, tokens: list[str]) -> list[str]:
        """One UPOS tag per token."""

    @abstractmethod
    def fill_mask(self, tokens: list[str], mask_index: int, top_k: int) -> list[dict]:
        """Candidates [{token, score, rank}], rank from 1, scores in (0, 1]
        non-increasing."""

    @abstractmethod
    def translate(self, text: str, target_language: str) -> str:
        """Non-empty translation; deterministic for a fixed input."""


# ---------------------------------------------------------------------------
# Rule-based adapter


_PERSONS = {
    "doctor", "nurse", "teacher", "lawyer", "engineer", "manager",
    "secretary", "cook", "cleaner", "assistant", "student", "worker",
    "scientist", "guard", "journalist", "pilot", "victim", "expert",
    "witness", "neighbor", "friend", "colleague", "boss", "client",
    "patient", "analyst", "consultant", "developer", "researcher",
    "professor", "officer", "reporter", "artist", "counselor",
    "psychologist", "mechanic", "electrician", "translator", "librarian",
    "cashier", "painter", "baker",
}

_DETS = {"a", "an", "the", "my", "this", "their", "every", "his", "her", "our"}
_VERBS = {
    "works", "worked", "helped", "called", "wrote", "reads", "teaches",
    "repairs", "manages", "answered", "is", "was", "are", "be", "has",
    "have", "had", "will", "can", "became", "likes", "needs", "wants",
    "arrived", "stayed", "met", "visited", "explained", "listens",
}
_ADPS = {"in", "at", "on", "of", "to", "for", "with", "about", "by", "from", "near"}
_PRONS = {"i", "you", "it", "we", "they", "me", "them", "who", "which", "that"}
_ADVS = {"so", "very", "too", "also", "never", "always", "again", "quickly"}
_ADJS = {"happy", "new", "old", "kind", "busy", "tired", "good", "bad"}
_CCONJ = {"and", "or", "but"}

# Fill-mask pool: person nouns plus distractors the downstream consumer
# is expected to filter out (subword fragments, non-nouns, names).
_POOL = sorted(_PERSONS) + [
    "##er", "##ing", "Mary", "John", "mother", "father", "house",
    "hospital", "office", "happy", "quickly", "the", "it",
]

_NOUN_TRANSLATIONS = {
    "fr": {
        "doctor": ("médecin", "M"), "nurse": ("infirmière", "F"),
        "teacher": ("enseignant", "M"), "victim": ("victime", "F"),
        "expert": ("expert", "M"), "secretary": ("secrétaire", "F"),
        "guard": ("gardien", "M"), "colleague": ("collègue", "M"),
        "boss": ("patron", "M"), "friend": ("ami", "M"),
    },
    "de": {
        "doctor": ("Arzt", "M"), "nurse": ("Krankenschwester", "F"),
        "teacher": ("Lehrer", "M"), "victim": ("Opfer", "N"),
        "expert": ("Experte", "M"), "secretary": ("Sekretärin", "F"),
        "guard": ("Wächter", "M"), "colleague": ("Kollege", "M"),
        "boss": ("Chef", "M"), "friend": ("Freund", "M"),
    },
    "es": {
        "doctor": ("doctor", "M"), "nurse": ("enfermera", "F"),
        "teacher": ("maestra", "F"), "victim": ("víctima", "F"),
        "expert": ("experto", "M"), "secretary": ("secretaria", "F"),
        "guard": ("guardia", "M"), "colleague": ("colega", "M"),
        "boss": ("jefe", "M"), "friend": ("amigo", "M"),
    },
    "ru": {
        "doctor": ("врач", "M"), "nurse": ("медсестра", "F"),
        "teacher": ("учитель", "M"), "victim": ("жертва", "F"),
        "expert": ("эксперт", "M"), "secretary": ("секретарь", "M"),
        "guard": ("охранник", "M"), "colleague": ("коллега", "M"),
        "boss": ("начальник", "M"), "friend": ("друг", "M"),
    },
}

# Gender-agreeing articles; ru has none.
_ARTICLES = {
    "fr": {"a": {"M": "un", "F": "une", "N": "un"},
           "an": {"M": "un", "F": "une", "N": "un"},
           "the": {"M": "le", "F": "la", "N": "le"}},
    "de": {"a": {"M": "ein", "F": "eine", "N": "ein"},
           "an": {"M": "ein", "F": "eine", "N": "ein"},
           "the": {"M": "der", "F": "die", "N": "das"}},
    "es": {"a": {"M": "un", "F": "una", "N": "un"},
           "an": {"M": "un", "F": "una", "N": "un"},
           "the": {"M": "el", "F": "la", "N": "el"}},
    "ru": {},
}


def _is_punct(token: str) -> bool:
    return all(unicodedata.category(ch).startswith("P") for ch in token)


class RuleAdapter(Adapter):
    name = "rule-based"

    def __init__(self) -> None:
        tables = [sorted(_PERSONS), _POOL, _NOUN_TRANSLATIONS, _ARTICLES]
        blob = json.dumps(tables, sort_keys=True, ensure_ascii=False)
        self._digest = hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]

    def identity(self, capability: str) -> str:
        return f"{self.name}-{capability}@{self._digest}"

    def ner(self, tokens: list[str]) -> list[dict]:
        return [
            {"token_index": i, "label": "PERSON"}
            for i, token in enumerate(tokens)
            if token.lower() in _PERSONS
        ]

    def pos(self, tokens: list[str]) -> list[str]:
        tags = []
        for token in tokens:
            lower = token.lower()
            if _is_punct(token):
                tags.append("PUNCT")
            elif lower.isdigit():
                tags.append("NUM")
            elif lower in _DETS:
                tags.append("DET")
            elif lower in _VERBS:
                tags.append("VERB")
            elif lower in _ADPS:
                tags.append("ADP")
            elif lower in _PRONS:
                tags.append("PRON")
            elif lower in _ADVS:
                tags.append("ADV")
            elif lower in _ADJS:
                tags.append("ADJ")
            elif lower in _CCONJ:
                tags.append("CCONJ")
            elif token[:1].isupper():
                tags.append("PROPN")
            else:
                tags.append("NOUN")
        return tags

    def fill_mask(self, tokens: list[str], mask_index: int, top_k: int) -> list[dict]:
        # Context (not the masked slot) picks where the pool rotation
        # starts, so distinct prompts see distinct candidate orders while
        # identical prompts replay identically.
        context = [t for i, t in enumerate(tokens) if i != mask_index]
        key = "\x1f".join(context) + f"\x1f{mask_index}"
        start = hashlib.sha256(key.encode("utf-8")).digest()[0] % len(_POOL)
        out = []
        for offset in range(min(top_k, len(_POOL))):
            rank = offset + 1
            out.append(
                {
                    "token": _POOL[(start + offset) % len(_POOL)],
                    "score": round(0.93**rank, 6),
                    "rank": rank,
                }
            )
        return out

    def translate(self, text: str, target_language: str) -> str:
        nouns = _NOUN_TRANSLATIONS[target_language]
        articles = _ARTICLES[target_language]
        words = text.split()
        genders = [nouns.get(w.lower(), (None, None))[1] for w in words]
        out = []
        for i, word in enumerate(words):
            lower = word.lower()
            if lower in nouns:
                out.append(nouns[lower][0])
            elif lower in articles:
                # Agree with the next translated person noun, if any.
                gender = next((g for g in genders[i + 1 :] if g), "M")
                out.append(articles[lower][gender])
            elif target_language == "ru" and lower in ("a", "an", "the"):
                continue  # Russian drops articles.
            else:
                out.append(word)
        return " ".join(out) if out else text


# ---------------------------------------------------------------------------
# Transformers-backed adapter


# Marian checkpoints per target language; overridable via config.
DEFAULT_TRANSLATE_MODELS = {
    lang: f"Helsinki-NLP/opus-mt-en-{lang}" for lang in LANGUAGES
}


def _char_spans(tokens: list[str]) -> list[tuple[int, int]]:
    """Character extents of each token in the space-joined text."""
    spans = []
    pos = 0
    for token in tokens:
        spans.append((pos, pos + len(token)))
        pos += len(token) + 1
    return spans


class TransformersAdapter(Adapter):
    """Pretrained checkpoints behind the same interface.

    Loads every model eagerly in the constructor: a server with missing
    weights must refuse to start rather than fail per-request.  Decoding
    is greedy everywhere so responses are deterministic at fixed model
    versions.
    """

    name = "transformers"

    def __init__(
        self,
        ner_model: str,
        pos_model: str,
        fill_mask_model: str,
        translate_models: dict[str, str] | None = None,
        mt_url: str = "",
        mt_token: str = "",
    ) -> None:
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise ModelLoadError(f"transformers is not installed: {exc}") from exc

        self._mt_url = mt_url.rstrip("/")
        self._mt_token = mt_token
        self._identities: dict[str, str] = {}
        translate_models = dict(translate_models or DEFAULT_TRANSLATE_MODELS)

        def load(task: str, model: str, capability: str):
            try:
                pipe = pipeline(task, model=model)
            except Exception as exc:
                raise ModelLoadError(f"cannot load {capability} model {model!r}: {exc}") from exc
            digest = getattr(pipe.model.config, "_commit_hash", None)
            digest = digest or hashlib.sha256(model.encode("utf-8")).hexdigest()[:12]
            self._identities[capability] = f"{model}@{digest}"
            return pipe

        self._ner = load("token-classification", ner_model, "ner")
        self._pos = load("token-classification", pos_model, "pos")
        self._fill = load("fill-mask", fill_mask_model, "fill_mask")
        if self._mt_url:
            digest = hashlib.sha256(self._mt_url.encode("utf-8")).hexdigest()[:12]
            self._identities["translate"] = f"external-mt@{digest}"
            self._translators = {}
        else:
            self._translators = {
                lang: load("translation", model, "translate")
                for lang, model in translate_models.items()
            }

    def identity(self, capability: str) -> str:
        return self._identities.get(capability, self.name)

    def ner(self, tokens: list[str]) -> list[dict]:
        text = " ".join(tokens)
        spans = _char_spans(tokens)
        entities = self._ner(text, aggregation_strategy="simple")
        person = set()
        for ent in entities:
            if "PER" not in str(ent.get("entity_group", "")).upper():
                continue
            for i, (lo, hi) in enumerate(spans):
                if lo < ent["end"] and ent["start"] < hi:
                    person.add(i)
        return [{"token_index": i, "label": "PERSON"} for i in sorted(person)]

    def pos(self, tokens: list[str]) -> list[str]:
        text = " ".join(tokens)
        spans = _char_spans(tokens)
        tags = ["X"] * len(tokens)
        for pred in self._pos(text):
            label = str(pred.get("entity", "X")).upper()
            for i, (lo, hi) in enumerate(spans):
                # First overlapping subword wins for the token.
                if lo <= pred["start"] < hi and tags[i] == "X":
                    tags[i] = label
        return tags

    def fill_mask(self, tokens: list[str], mask_index: int, top_k: int) -> list[dict]:
        masked = list(tokens)
        masked[mask_index] = self._fill.tokenizer.mask_token
        results = self._fill(" ".join(masked), top_k=top_k)
        out = []
        for result in results:
            token = str(result["token_str"]).strip()
            if not token:
                continue
            out.append({"token": token, "score": float(result["score"])})
        out.sort(key=lambda c: -c["score"])
        for rank, cand in enumerate(out, start=1):
            cand["rank"] = rank
        return out[:top_k]

    def translate(self, text: str, target_language: str) -> str:
        if self._mt_url:
            return self._external_translate(text, target_language)
        translator = self._translators[target_language]
        result = translator(text, num_beams=1, do_sample=False)
        return str(result[0]["translation_text"])

    def _external_translate(self, text: str, target_language: str) -> str:
        import requests

        headers = {}
        if self._mt_token:
            headers["Authorization"] = f"Bearer {self._mt_token}"
        resp = requests.post(
            self._mt_url,
            json={"text": text, "target_language": target_language},
            headers=headers,
            timeout=30,
        )
        resp.raise_for_status()
        return str(resp.json()["text"])
