"""Deterministic rule-based model backends for fixture generation.

Serves the four gateway capabilities over HTTP with toy linguistics: a
closed person-noun inventory for NER/POS, a rotating candidate pool for
fill-mask, and word-by-word translation with determiner agreement plus a
handful of exact-sentence translations.  Every response is a pure function
of the request body, so harvested caches replay byte-identically.
"""

from __future__ import annotations

import hashlib
import json
import sys
import unicodedata
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from genswap.textproc import tokenize  # noqa: E402

# ---------------------------------------------------------------------------
# Person-noun inventory: english -> per-language (surface, gender)

NOUNS: dict[str, dict[str, tuple[str, str]]] = {
    "counselor": {"fr": ("conseiller", "M"), "de": ("Berater", "M"), "es": ("consejero", "M"), "ru": ("консультант", "M")},
    "doctor": {"fr": ("médecin", "M"), "de": ("Arzt", "M"), "es": ("doctor", "M"), "ru": ("врач", "M")},
    "nurse": {"fr": ("infirmière", "F"), "de": ("Krankenschwester", "F"), "es": ("enfermera", "F"), "ru": ("медсестра", "F")},
    "teacher": {"fr": ("enseignant", "M"), "de": ("Lehrer", "M"), "es": ("maestra", "F"), "ru": ("учитель", "M")},
    "lawyer": {"fr": ("avocat", "M"), "de": ("Anwalt", "M"), "es": ("abogado", "M"), "ru": ("юрист", "M")},
    "engineer": {"fr": ("ingénieur", "M"), "de": ("Ingenieur", "M"), "es": ("ingeniero", "M"), "ru": ("инженер", "M")},
    "manager": {"fr": ("gestionnaire", "M"), "de": ("Manager", "M"), "es": ("gerente", "M"), "ru": ("менеджер", "M")},
    "secretary": {"fr": ("secrétaire", "F"), "de": ("Sekretärin", "F"), "es": ("secretaria", "F"), "ru": ("секретарь", "M")},
    "electrician": {"fr": ("électricien", "M"), "de": ("Elektriker", "M"), "es": ("electricista", "M"), "ru": ("электрик", "M")},
    "cook": {"fr": ("cuisinière", "F"), "de": ("Koch", "M"), "es": ("cocinera", "F"), "ru": ("повар", "M")},
    "psychologist": {"fr": ("psychologue", "M"), "de": ("Psychologe", "M"), "es": ("psicólogo", "M"), "ru": ("психолог", "M")},
    "mechanic": {"fr": ("mécanicien", "M"), "de": ("Mechaniker", "M"), "es": ("mecánico", "M"), "ru": ("механик", "M")},
    "cleaner": {"fr": ("nettoyeuse", "F"), "de": ("Reinigungskraft", "F"), "es": ("limpiadora", "F"), "ru": ("уборщица", "F")},
    "assistant": {"fr": ("assistante", "F"), "de": ("Assistentin", "F"), "es": ("asistente", "M"), "ru": ("помощница", "F")},
    "writer": {"fr": ("écrivain", "M"), "de": ("Schriftsteller", "M"), "es": ("escritor", "M"), "ru": ("писатель", "M")},
    "employee": {"fr": ("employé", "M"), "de": ("Mitarbeiter", "M"), "es": ("empleado", "M"), "ru": ("сотрудник", "M")},
    "employees": {"fr": ("employés", "M"), "de": ("Mitarbeiter", "M"), "es": ("empleados", "M"), "ru": ("сотрудники", "M")},
    "student": {"fr": ("étudiant", "M"), "de": ("Student", "M"), "es": ("estudiante", "M"), "ru": ("студент", "M")},
    "worker": {"fr": ("travailleur", "M"), "de": ("Arbeiter", "M"), "es": ("trabajador", "M"), "ru": ("рабочий", "M")},
    "farmer": {"fr": ("agriculteur", "M"), "de": ("Bauer", "M"), "es": ("agricultor", "M"), "ru": ("фермер", "M")},
    "scientist": {"fr": ("scientifique", "M"), "de": ("Wissenschaftler", "M"), "es": ("científico", "M"), "ru": ("ученый", "M")},
    "dentist": {"fr": ("dentiste", "M"), "de": ("Zahnarzt", "M"), "es": ("dentista", "M"), "ru": ("стоматолог", "M")},
    "accountant": {"fr": ("comptable", "M"), "de": ("Buchhalter", "M"), "es": ("contador", "M"), "ru": ("бухгалтер", "M")},
    "plumber": {"fr": ("plombier", "M"), "de": ("Klempner", "M"), "es": ("fontanero", "M"), "ru": ("сантехник", "M")},
    "technician": {"fr": ("technicien", "M"), "de": ("Techniker", "M"), "es": ("técnico", "M"), "ru": ("техник", "M")},
    "receptionist": {"fr": ("réceptionniste", "F"), "de": ("Empfangsdame", "F"), "es": ("recepcionista", "F"), "ru": ("администратор", "M")},
    "supervisor": {"fr": ("superviseur", "M"), "de": ("Vorgesetzter", "M"), "es": ("supervisora", "F"), "ru": ("руководитель", "M")},
    "babysitter": {"fr": ("nounou", "F"), "de": ("Babysitterin", "F"), "es": ("niñera", "F"), "ru": ("няня", "F")},
    "dishwasher": {"fr": ("plongeur", "M"), "de": ("Spüler", "M"), "es": ("lavaplatos", "M"), "ru": ("посудомойка", "F")},
    "guard": {"fr": ("gardien", "M"), "de": ("Wächter", "M"), "es": ("guardia", "M"), "ru": ("охранник", "M")},
    "journalist": {"fr": ("journaliste", "M"), "de": ("Journalist", "M"), "es": ("periodista", "M"), "ru": ("журналист", "M")},
    "designer": {"fr": ("concepteur", "M"), "de": ("Designer", "M"), "es": ("diseñador", "M"), "ru": ("дизайнер", "M")},
    "pilot": {"fr": ("pilote", "M"), "de": ("Pilot", "M"), "es": ("piloto", "M"), "ru": ("пилот", "M")},
    "surgeon": {"fr": ("chirurgien", "M"), "de": ("Chirurg", "M"), "es": ("cirujano", "M"), "ru": ("хирург", "M")},
    "therapist": {"fr": ("thérapeute", "M"), "de": ("Therapeut", "M"), "es": ("terapeuta", "M"), "ru": ("терапевт", "M")},
    "tutor": {"fr": ("tuteur", "M"), "de": ("Nachhilfelehrer", "M"), "es": ("tutor", "M"), "ru": ("репетитор", "M")},
    "translator": {"fr": ("traductrice", "F"), "de": ("Übersetzerin", "F"), "es": ("traductora", "F"), "ru": ("переводчица", "F")},
    "librarian": {"fr": ("bibliothécaire", "F"), "de": ("Bibliothekarin", "F"), "es": ("bibliotecaria", "F"), "ru": ("библиотекарь", "M")},
    "cashier": {"fr": ("caissière", "F"), "de": ("Kassiererin", "F"), "es": ("cajera", "F"), "ru": ("кассирша", "F")},
    "painter": {"fr": ("peintre", "M"), "de": ("Maler", "M"), "es": ("pintor", "M"), "ru": ("художник", "M")},
    "baker": {"fr": ("boulanger", "M"), "de": ("Bäcker", "M"), "es": ("panadero", "M"), "ru": ("пекарь", "M")},
    "victim": {"fr": ("victime", "F"), "de": ("Opfer", "N"), "es": ("víctima", "F"), "ru": ("жертва", "F")},
    "expert": {"fr": ("expert", "M"), "de": ("Experte", "M"), "es": ("experto", "M"), "ru": ("эксперт", "M")},
    "witness": {"fr": ("témoin", "M"), "de": ("Zeuge", "M"), "es": ("testigo", "M"), "ru": ("свидетель", "M")},
    "neighbor": {"fr": ("voisin", "M"), "de": ("Nachbar", "M"), "es": ("vecino", "M"), "ru": ("сосед", "M")},
    "friend": {"fr": ("ami", "M"), "de": ("Freund", "M"), "es": ("amigo", "M"), "ru": ("друг", "M")},
    "colleague": {"fr": ("collègue", "M"), "de": ("Kollege", "M"), "es": ("colega", "M"), "ru": ("коллега", "M")},
    "boss": {"fr": ("patron", "M"), "de": ("Chef", "M"), "es": ("jefe", "M"), "ru": ("начальник", "M")},
    "client": {"fr": ("client", "M"), "de": ("Kunde", "M"), "es": ("cliente", "M"), "ru": ("клиент", "M")},
    "patient": {"fr": ("patient", "M"), "de": ("Patient", "M"), "es": ("paciente", "M"), "ru": ("пациент", "M")},
    "volunteer": {"fr": ("bénévole", "M"), "de": ("Freiwilliger", "M"), "es": ("voluntario", "M"), "ru": ("волонтёр", "M")},
    "intern": {"fr": ("stagiaire", "M"), "de": ("Praktikantin", "F"), "es": ("pasante", "M"), "ru": ("стажёр", "M")},
    "apprentice": {"fr": ("apprenti", "M"), "de": ("Lehrling", "M"), "es": ("aprendiz", "M"), "ru": ("ученик", "M")},
    "analyst": {"fr": ("analyste", "M"), "de": ("Analyst", "M"), "es": ("analista", "M"), "ru": ("аналитик", "M")},
    "consultant": {"fr": ("consultant", "M"), "de": ("Berater", "M"), "es": ("consultor", "M"), "ru": ("консультант", "M")},
    "developer": {"fr": ("développeur", "M"), "de": ("Entwickler", "M"), "es": ("desarrollador", "M"), "ru": ("разработчик", "M")},
    "programmer": {"fr": ("programmeuse", "F"), "de": ("Programmierer", "M"), "es": ("programador", "M"), "ru": ("программист", "M")},
    "researcher": {"fr": ("chercheur", "M"), "de": ("Forscher", "M"), "es": ("investigador", "M"), "ru": ("исследователь", "M")},
    "professor": {"fr": ("professeur", "M"), "de": ("Professor", "M"), "es": ("profesor", "M"), "ru": ("профессор", "M")},
    "lecturer": {"fr": ("conférencier", "M"), "de": ("Dozent", "M"), "es": ("conferenciante", "M"), "ru": ("лектор", "M")},
    "officer": {"fr": ("officier", "M"), "de": ("Offizier", "M"), "es": ("oficial", "M"), "ru": ("офицер", "M")},
    "reporter": {"fr": ("journaliste", "M"), "de": ("Reporter", "M"), "es": ("reportero", "M"), "ru": ("репортёр", "M")},
    "artist": {"fr": ("artiste", "M"), "de": ("Künstler", "M"), "es": ("artista", "M"), "ru": ("художник", "M")},
    "musician": {"fr": ("musicien", "M"), "de": ("Musiker", "M"), "es": ("músico", "M"), "ru": ("музыкант", "M")},
    "photographer": {"fr": ("photographe", "M"), "de": ("Fotograf", "M"), "es": ("fotógrafo", "M"), "ru": ("фотограф", "M")},
}

# Recognized as PERSON by the toy NER but deliberately left out of the
# translation tables (copies through, exercising unknown-surface tagging).
EXTRA_PERSONS = {"quartermaster"}

# Person words the real filter rejects as lexically gendered; the toy NER
# still marks them PERSON so the reject happens for the documented reason.
GENDERED_PERSONS = {
    "mother", "father", "brother", "sister", "aunt", "uncle", "waitress",
    "actress", "widow", "king", "queen", "businessman",
    "saleswoman", "chairman", "grandmother", "grandfather", "nun", "monk",
    "she", "he",
}

FIRST_NAMES = {"mary", "john", "sarah", "david"}

PERSON_TOKENS = set(NOUNS) | EXTRA_PERSONS | GENDERED_PERSONS | FIRST_NAMES

# ---------------------------------------------------------------------------
# POS word classes

DETS = {"a", "an", "the", "my", "this", "their", "every", "his", "her", "our"}
VERBS = {
    "works", "worked", "working", "fixed", "explained", "listens", "helped",
    "visited", "called", "wrote", "reads", "read", "teaches", "cleaned",
    "repairs", "manages", "answered", "cooked", "guarded", "flew",
    "operated", "studied", "trained", "painted", "baked", "hired",
    "thanked", "met", "kept", "started", "crashed", "likes", "needs",
    "wants", "plans", "hopes", "became", "become", "becoming", "moved",
    "talked", "asked", "upgraded", "decided", "learning", "thinking",
    "spent", "doing", "affect", "broke", "is", "was", "are", "be", "have",
    "has", "had", "do", "does", "don't", "going", "will", "would", "can",
    "dreams", "signed", "checked", "joined", "waved", "smiled", "retired",
    "arrived", "stayed", "quit", "praised", "interviewed", "paid",
    "greeted", "trusted", "blamed", "admired", "promoted",
}
ADPS = {
    "in", "at", "on", "of", "to", "for", "with", "about", "before",
    "after", "during", "into", "by", "as", "from", "near", "over",
}
PRONS = {"i", "you", "it", "we", "they", "me", "them", "who", "which", "that", "whatever"}
ADVS = {"twice", "again", "yesterday", "quickly", "currently", "mostly", "so", "then", "very", "too", "also", "never", "always", "hard"}
ADJS = {"happy", "new", "old", "kind", "busy", "tired", "late", "early", "long", "short", "good", "bad", "previous", "single", "tidy"}
CCONJ = {"and", "or", "but"}

# Ambiguous person words read as verbs right after a pronoun subject.
AMBIG_VERBS = {"doctor", "nurse", "cook", "guard", "pilot", "tutor", "engineer"}


def is_punct(token: str) -> bool:
    return all(unicodedata.category(ch).startswith("P") for ch in token)


def pos_tags(tokens: list[str]) -> list[str]:
    tags: list[str] = []
    for i, token in enumerate(tokens):
        lower = token.lower()
        prev = tokens[i - 1].lower() if i > 0 else ""
        if is_punct(token):
            tags.append("PUNCT")
        elif lower.replace(".", "").isdigit():
            tags.append("NUM")
        elif lower in AMBIG_VERBS and prev in ("they", "we", "you", "i", "to"):
            tags.append("VERB")
        elif lower in FIRST_NAMES or (i > 0 and token[:1].isupper()):
            tags.append("PROPN")
        elif lower in DETS:
            tags.append("DET")
        elif lower in VERBS:
            tags.append("VERB")
        elif lower in ADPS:
            tags.append("ADP")
        elif lower in PRONS:
            tags.append("PRON")
        elif lower in ADVS:
            tags.append("ADV")
        elif lower in ADJS:
            tags.append("ADJ")
        elif lower in CCONJ:
            tags.append("CCONJ")
        else:
            tags.append("NOUN")
    return tags


def ner_spans(tokens: list[str]) -> list[dict]:
    spans = []
    for i, token in enumerate(tokens):
        lower = token.lower()
        prev = tokens[i - 1].lower() if i > 0 else ""
        if lower in AMBIG_VERBS and prev in ("they", "we", "you", "i", "to"):
            # Verb usage is still a person-word hit for the toy tagger.
            spans.append({"token_index": i, "label": "PERSON"})
        elif lower in PERSON_TOKENS:
            spans.append({"token_index": i, "label": "PERSON"})
    return spans


# ---------------------------------------------------------------------------
# Fill-mask

POOL = [
    "nurse", "teacher", "it", "lawyer", "Mary", "mother", "doctor",
    "engineer", "cook", "##er", "secretary", "manager", "cleaner",
    "writer", "employee", "student", "worker", "farmer", "scientist",
    "the", "dentist", "accountant", "plumber", "technician",
    "receptionist", "supervisor", "babysitter", "dishwasher", "guard",
    "happy", "journalist", "designer", "pilot", "surgeon", "therapist",
    "tutor", "translator", "librarian", "cashier", "painter", "baker",
    "victim", "expert", "witness", "neighbor", "friend", "colleague",
    "boss", "client", "patient", "volunteer", "intern", "apprentice",
    "analyst", "consultant", "developer", "programmer", "researcher",
    "professor", "lecturer", "officer", "reporter", "artist", "musician",
    "photographer", "counselor", "psychologist", "mechanic",
    "electrician", "assistant", "John", "father", "##ing", "quickly",
    "house", "waitress",
]

# Fragment-heavy pool for the scan-cap exercise: 120 candidates, only
# three acceptable person nouns, placed deep.
SCANCAP_POOL = (
    ["##x%02d" % i for i in range(30)]
    + ["officer"]
    + ["##y%02d" % i for i in range(29)]
    + ["guard"]
    + ["##z%02d" % i for i in range(29)]
    + ["pilot"]
    + ["##w%02d" % i for i in range(29)]
)

COUNSELOR_MARKERS = ("chances", "becoming")
PSYCH_MARKERS = ("upgraded",)
VICTIM_MARKERS = ("whatever",)
SCANCAP_MARKERS = ("stores", "tidy")


def fill_candidates(tokens: list[str], mask_index: int, top_k: int) -> list[dict]:
    context = [t for i, t in enumerate(tokens) if i != mask_index]
    lowered = {t.lower() for t in context}
    if all(marker in lowered for marker in SCANCAP_MARKERS):
        pool = SCANCAP_POOL
        start = 0
    elif all(marker in lowered for marker in COUNSELOR_MARKERS):
        pool = POOL
        start = 0
    elif all(marker in lowered for marker in PSYCH_MARKERS):
        pool = POOL
        start = 0
    elif all(marker in lowered for marker in VICTIM_MARKERS):
        pool = POOL
        start = POOL.index("expert")
    else:
        digest = hashlib.sha256("\x1f".join(context).encode("utf-8")).digest()
        pool = POOL
        start = digest[0] % len(pool)
    out = []
    for offset in range(min(top_k, len(pool))):
        token = pool[(start + offset) % len(pool)]
        rank = offset + 1
        out.append({"token": token, "score": round(0.97**rank, 6), "rank": rank})
    return out


# ---------------------------------------------------------------------------
# Translation

VOWELS = set("aeiouéèêàâîôûh")

ARTICLES = {
    "fr": {
        "a": {"M": "un", "F": "une", "N": "un"},
        "an": {"M": "un", "F": "une", "N": "un"},
        "the": {"M": "le", "F": "la", "N": "le"},
        "my": {"M": "mon", "F": "ma", "N": "mon"},
        "this": {"M": "ce", "F": "cette", "N": "ce"},
        "their": {"M": "leur", "F": "leur", "N": "leur"},
        "every": {"M": "chaque", "F": "chaque", "N": "chaque"},
    },
    "de": {
        "a": {"M": "ein", "F": "eine", "N": "ein"},
        "an": {"M": "ein", "F": "eine", "N": "ein"},
        "the": {"M": "der", "F": "die", "N": "das"},
        "my": {"M": "mein", "F": "meine", "N": "mein"},
        "this": {"M": "dieser", "F": "diese", "N": "dieses"},
        "their": {"M": "ihr", "F": "ihre", "N": "ihr"},
        "every": {"M": "jeder", "F": "jede", "N": "jedes"},
    },
    "es": {
        "a": {"M": "un", "F": "una", "N": "un"},
        "an": {"M": "un", "F": "una", "N": "un"},
        "the": {"M": "el", "F": "la", "N": "el"},
        "my": {"M": "mi", "F": "mi", "N": "mi"},
        "this": {"M": "este", "F": "esta", "N": "este"},
        "their": {"M": "su", "F": "su", "N": "su"},
        "every": {"M": "cada", "F": "cada", "N": "cada"},
    },
}

# Small function-word tables so fixture artifacts read like translations.
FUNCTION_WORDS = {
    "fr": {
        "works": "travaille", "worked": "travaillait", "in": "dans",
        "at": "à", "of": "de", "to": "à", "with": "avec", "and": "et",
        "hospital": "hôpital", "office": "bureau", "school": "école",
        "is": "est", "was": "était", "i": "je", "you": "vous",
        "kitchen": "cuisine", "became": "devint", "becoming": "devenir",
    },
    "de": {
        "works": "arbeitet", "worked": "arbeitete", "in": "in", "at": "bei",
        "of": "von", "to": "zu", "with": "mit", "and": "und",
        "hospital": "Krankenhaus", "office": "Büro", "school": "Schule",
        "is": "ist", "was": "war", "i": "ich", "you": "Sie",
        "kitchen": "Küche", "became": "wurde", "becoming": "werden",
    },
    "es": {
        "works": "trabaja", "worked": "trabajaba", "in": "en", "at": "en",
        "of": "de", "to": "a", "with": "con", "and": "y",
        "hospital": "hospital", "office": "oficina", "school": "escuela",
        "is": "es", "was": "era", "i": "yo", "you": "usted",
        "kitchen": "cocina", "became": "llegó", "becoming": "ser",
    },
    "ru": {
        "works": "работает", "worked": "работал", "in": "в", "at": "в",
        "of": "из", "to": "к", "with": "с", "and": "и",
        "hospital": "больнице", "office": "офисе", "school": "школе",
        "is": "есть", "was": "был", "i": "я", "you": "вы",
        "kitchen": "кухне", "became": "стал", "becoming": "стать",
    },
}

# Exact-sentence translations mirroring published examples.
SPECIALS: dict[tuple[str, str], str] = {
    ("so is that going to affect my chances of becoming a counselor?", "fr"):
        "Alors, est - ce que cela va affecter mes chances de devenir conseiller?",
    ("so is that going to affect my chances of becoming a nurse?", "fr"):
        "Alors, est - ce que cela va affecter mes chances de devenir infirmière?",
    ("currently thinking about learning a trade (mostly a electrician).", "de"):
        "Derzeit über das Erlernen eines Gewerbes nachdenken (meistens Elektriker).",
    ("i read about a psychologist who upgraded into becoming a m.d.", "ru"):
        "Я читал о психологе, который превратился в Md.",
    ("i read about a nurse who upgraded into becoming a m.d.", "ru"):
        "Я читал о медсестре, которая превратилась в доктора медицины.",
    ("you don't have to be the victim in whatever.", "fr"):
        "vous ne devez pas être la victime de quoi que ce soit.",
    ("you don't have to be the expert in whatever.", "fr"):
        "vous ne devez pas être l'expert en quoi que ce soit.",
    ("- decided to become a lecturer: spent a year working 2 jobs and doing prerequisites for a masters in education.", "es"):
        "- Decidí ser profesor: pasé un año trabajando en 2 trabajos y haciendo requisitos previos para una maestría en educación.",
}


def _noun_for(token: str, lang: str) -> tuple[str, str] | None:
    entry = NOUNS.get(token.lower())
    if entry is None:
        return None
    return entry[lang]


def _next_noun_gender(tokens: list[str], start: int, lang: str) -> str | None:
    # Allow one adjective between the determiner and its noun.
    for j in range(start, min(start + 3, len(tokens))):
        noun = _noun_for(tokens[j], lang)
        if noun is not None:
            return noun[1]
        if tokens[j].lower() not in ADJS:
            return None
    return None


def translate_text(text: str, lang: str) -> str:
    special = SPECIALS.get((text, lang))
    if special is not None:
        return special
    tokens = tokenize(text)
    out: list[str] = []
    for i, token in enumerate(tokens):
        lower = token.lower()
        noun = _noun_for(token, lang)
        if noun is not None:
            surface = noun[0]
            # French definite article elides before a vowel-initial noun.
            if (
                lang == "fr"
                and out
                and out[-1] in ("le", "la")
                and surface[:1].lower() in VOWELS
            ):
                out[-1] = "l'" + surface
                continue
            out.append(surface)
            continue
        if lower in ("a", "an", "the", "my", "this", "their", "every"):
            # Nouns outside the person table agree as masculine by default.
            gender = _next_noun_gender(tokens, i + 1, lang) or "M"
            if lang == "ru":
                if lower == "my":
                    out.append("мой" if gender == "M" else "моя")
                elif lower == "this":
                    out.append("этот" if gender == "M" else "эта")
                # bare articles have no Russian counterpart: drop
                continue
            table = ARTICLES[lang].get(lower)
            if table is not None:
                out.append(table[gender])
                continue
        mapped = FUNCTION_WORDS[lang].get(lower)
        out.append(mapped if mapped is not None else token)
    pieces: list[str] = []
    for token in out:
        if pieces and not (is_punct(token) and token not in ("(", "«")):
            pieces.append(" ")
        elif pieces and is_punct(token) and token in ("(", "«"):
            pieces.append(" ")
        pieces.append(token)
    return "".join(pieces)


# ---------------------------------------------------------------------------
# HTTP server

MODEL_IDENTITIES = {
    "ner": "toy-person-ner/1.0",
    "pos": "toy-upos/1.0",
    "fill_mask": "toy-masked-lm/1.0",
    "translate": "toy-word-mt/1.0",
}


class ToyHandler(BaseHTTPRequestHandler):
    def log_message(self, fmt, *args):
        pass

    def do_POST(self):
        length = int(self.headers.get("Content-Length") or 0)
        body = json.loads(self.rfile.read(length).decode("utf-8"))
        path = self.path.rstrip("/")
        try:
            if path == "/ner":
                payload = {"spans": ner_spans(body["tokens"])}
            elif path == "/pos":
                payload = {"tags": pos_tags(body["tokens"])}
            elif path == "/fill_mask":
                payload = {
                    "candidates": fill_candidates(
                        body["tokens"], body["mask_index"], body["top_k"]
                    )
                }
            elif path == "/translate":
                payload = {
                    "text": translate_text(body["text"], body["target_language"])
                }
            else:
                self._reply(404, {"code": "not_found", "message": path}, path)
                return
        except Exception as exc:
            self._reply(400, {"code": "bad_request", "message": str(exc)}, path)
            return
        self._reply(200, payload, path)

    def _reply(self, status: int, payload: dict, path: str):
        data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        identity = MODEL_IDENTITIES.get(path.lstrip("/"))
        if identity:
            self.send_header("X-Model-Identity", identity)
        self.end_headers()
        self.wfile.write(data)


def serve(port: int = 0) -> ThreadingHTTPServer:
    return ThreadingHTTPServer(("127.0.0.1", port), ToyHandler)


if __name__ == "__main__":
    server = serve(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
    print(f"toy models listening on http://127.0.0.1:{server.server_address[1]}/")
    server.serve_forever()
