"""Run-directory orchestration for the full mining pipeline.

A run directory owns a gateway response cache, one JSON-lines artifact per
stage, a state file recording artifact digests for resumption, and a
manifest capturing every nondeterminism source (caps, alignment parameters,
seeds, backend identities, word-list digests) plus stage counts.

Stages run in a fixed order: ingest, filter, perturb, translate, align,
tag, detect, sample.  A stage is skipped on resume when the state file says
it completed and its artifacts still match their recorded digests.  Stage
functions are also callable standalone on explicit paths; the CLI verbs use
them that way.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import alignment
from .divergence import classify, negative_seed, sample_negatives
from .filtering import (
    FilterReport,
    Rejection,
    default_first_names_path,
    default_gendered_paths,
    filter_sentence,
    load_first_names,
    load_gendered_list,
)
from .gateway import ModelGateway, request_digest, resolve_backend_urls
from .gender import GenderTagger, default_lexicon_paths, default_rules_path
from .perturb import DEFAULT_ACCEPT_CAP, DEFAULT_SCAN_CAP, PerturbReport, perturb
from .records import (
    LANGUAGES,
    AnnotationState,
    ConfigurationError,
    ExampleRecord,
    ProjectedFocus,
    Risk,
    RiskLabel,
    SentenceRecord,
    Side,
    SourceSentence,
    TranslationOutcome,
    read_jsonl,
    write_jsonl,
)
from .textproc import (
    DEFAULT_MAX_TOKENS,
    IngestConfig,
    IngestReport,
    detokenize,
    ingest,
    iter_documents,
    tokenize,
)

logger = logging.getLogger(__name__)

STAGES = (
    "ingest",
    "filter",
    "perturb",
    "translate",
    "align",
    "tag",
    "detect",
    "sample",
)


class PipelineError(RuntimeError):
    """Stage-fatal failure; message carries the stage and offending record."""


@dataclass(frozen=True)
class PipelineConfig:
    input: str = ""
    input_format: str = "txt"
    max_tokens: int = DEFAULT_MAX_TOKENS
    languages: tuple[str, ...] = LANGUAGES
    scan_cap: int = DEFAULT_SCAN_CAP
    accept_cap: int = DEFAULT_ACCEPT_CAP
    em_lambda: float = alignment.DEFAULT_LAMBDA
    null_prob: float = alignment.DEFAULT_NULL_PROB
    iterations: int = alignment.DEFAULT_ITERATIONS
    seed: int = 13
    negatives: int = 100
    quota_positives: int = 100
    quota_negatives: int = 100
    translate_workers: int = 8
    cache: bool = True
    backends: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.input_format not in ("txt", "jsonl"):
            raise ConfigurationError(f"unknown input format: {self.input_format}")
        unknown = [lang for lang in self.languages if lang not in LANGUAGES]
        if unknown:
            raise ConfigurationError(f"unsupported languages: {unknown}")
        if not self.languages:
            raise ConfigurationError("no target languages configured")
        if self.scan_cap < 1 or self.accept_cap < 1:
            raise ConfigurationError("caps must be >= 1")
        if self.iterations < 1:
            raise ConfigurationError("iterations must be >= 1")
        if self.negatives < 0:
            raise ConfigurationError("negatives must be >= 0")

    def to_json(self) -> dict:
        row = asdict(self)
        row["languages"] = list(self.languages)
        return row

    def digest(self) -> str:
        return request_digest(self.to_json())


_CONFIG_KEYS = {
    "input": str,
    "input_format": str,
    "max_tokens": int,
    "languages": lambda v: tuple(part.strip() for part in v.split(",") if part.strip()),
    "scan_cap": int,
    "accept_cap": int,
    "em_lambda": float,
    "null_prob": float,
    "iterations": int,
    "seed": int,
    "negatives": int,
    "quota_positives": int,
    "quota_negatives": int,
    "translate_workers": int,
    "cache": lambda v: v.lower() in ("1", "true", "yes", "on"),
}


def parse_config_text(text: str) -> dict:
    """key = value lines; # comments; backend.<capability> keys nest."""
    values: dict = {}
    backends: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key.startswith("backend."):
            backends[key[len("backend.") :]] = value
        elif key in _CONFIG_KEYS:
            try:
                values[key] = _CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise ConfigurationError(f"config line {lineno}: {exc}") from exc
        else:
            raise ConfigurationError(f"config line {lineno}: unknown key {key!r}")
    if backends:
        values["backends"] = backends
    return values


def load_config(path: Path | str | None = None, overrides: dict | None = None) -> PipelineConfig:
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"config file not found: {path}")
        values.update(parse_config_text(path.read_text(encoding="utf-8")))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return PipelineConfig(**values)


class RunPaths:
    """Canonical layout of a run directory."""

    def __init__(self, run_dir: Path | str):
        self.run_dir = Path(run_dir)

    @property
    def artifacts(self) -> Path:
        return self.run_dir / "artifacts"

    @property
    def cache_dir(self) -> Path:
        return self.run_dir / "cache"

    @property
    def state(self) -> Path:
        return self.run_dir / "state.json"

    @property
    def manifest(self) -> Path:
        return self.run_dir / "manifest.json"

    @property
    def lock(self) -> Path:
        return self.run_dir / "run.lock"

    @property
    def review_dir(self) -> Path:
        return self.run_dir / "review"

    @property
    def decisions(self) -> Path:
        return self.review_dir / "decisions.jsonl"

    @property
    def stats_dir(self) -> Path:
        return self.run_dir / "stats"

    @property
    def exports_dir(self) -> Path:
        return self.run_dir / "exports"

    def sentences(self) -> Path:
        return self.artifacts / "01_sentences.jsonl"

    def sources(self) -> Path:
        return self.artifacts / "02_sources.jsonl"

    def rejects(self) -> Path:
        return self.artifacts / "02_rejects.jsonl"

    def pairs(self) -> Path:
        return self.artifacts / "03_pairs.jsonl"

    def translations(self) -> Path:
        return self.artifacts / "04_translations.jsonl"

    def align_model(self, language: str) -> Path:
        return self.artifacts / f"05_model_{language}.txt"

    def projections(self) -> Path:
        return self.artifacts / "05_projections.jsonl"

    def outcomes(self) -> Path:
        return self.artifacts / "06_outcomes.jsonl"

    def risk(self) -> Path:
        return self.artifacts / "07_risk.jsonl"

    def negatives(self) -> Path:
        return self.artifacts / "08_negatives.jsonl"

    def records(self) -> Path:
        return self.artifacts / "09_records.jsonl"

    def stage_artifacts(self, stage: str, languages: tuple[str, ...]) -> list[Path]:
        table = {
            "ingest": [self.sentences()],
            "filter": [self.sources(), self.rejects()],
            "perturb": [self.pairs()],
            "translate": [self.translations()],
            "align": [self.align_model(lang) for lang in languages]
            + [self.projections()],
            "tag": [self.outcomes()],
            "detect": [self.risk()],
            "sample": [self.negatives(), self.records()],
        }
        return table[stage]


@contextmanager
def run_lock(paths: RunPaths):
    """Exclusive orchestrator lock on the run directory."""
    paths.run_dir.mkdir(parents=True, exist_ok=True)
    try:
        fd = os.open(paths.lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise PipelineError(
            f"run directory locked by another orchestrator: {paths.lock}"
        ) from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode("ascii"))
        os.close(fd)
        yield
    finally:
        paths.lock.unlink(missing_ok=True)


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# Artifact views


@dataclass(frozen=True)
class PairView:
    """A perturbed pair as stored in the pairs artifact."""

    pair_id: str
    sentence_id: str
    focus_index: int
    original: str
    substitute: str
    candidate_rank: int
    mlm_score: float

    def to_json(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, row: dict) -> "PairView":
        return cls(**row)

    def original_tokens(self, sentences: dict[str, SentenceRecord]) -> list[str]:
        return self._sentence(sentences).surfaces()

    def substituted_tokens(self, sentences: dict[str, SentenceRecord]) -> list[str]:
        surfaces = self.original_tokens(sentences)
        surfaces[self.focus_index] = self.substitute
        return surfaces

    def _sentence(self, sentences: dict[str, SentenceRecord]) -> SentenceRecord:
        try:
            return sentences[self.sentence_id]
        except KeyError:
            raise PipelineError(
                f"pair {self.pair_id}: sentence {self.sentence_id} missing"
            ) from None


def load_sentences(path: Path) -> dict[str, SentenceRecord]:
    out: dict[str, SentenceRecord] = {}
    for row in read_jsonl(path):
        record = SentenceRecord.from_json(row)
        out[record.sentence_id] = record
    return out


def load_pair_views(path: Path) -> list[PairView]:
    return [PairView.from_json(row) for row in read_jsonl(path)]


# ---------------------------------------------------------------------------
# Stage functions (standalone; the runner wires them to the run directory)


def stage_ingest(
    input_path: Path, input_format: str, out_path: Path, max_tokens: int
) -> IngestReport:
    report = IngestReport()
    docs = iter_documents(input_path, input_format, report)
    rows = ingest(docs, IngestConfig(max_tokens=max_tokens), report)
    write_jsonl(out_path, (record.to_json() for record in rows))
    return report


def stage_filter(
    sentences_path: Path,
    out_path: Path,
    rejects_path: Path,
    gateway: ModelGateway,
) -> FilterReport:
    lexicon = load_gendered_list(default_gendered_paths())
    first_names = load_first_names(default_first_names_path())
    report = FilterReport()
    sources: list[dict] = []
    rejects: list[dict] = []
    for row in read_jsonl(sentences_path):
        record = SentenceRecord.from_json(row)
        try:
            ner = gateway.ner_tag(record.surfaces())
            pos = gateway.pos_tag(record.surfaces())
            verdict = filter_sentence(record, ner, pos, lexicon, first_names)
        except Exception as exc:
            raise PipelineError(f"[filter] {record.sentence_id}: {exc}") from exc
        if isinstance(verdict, Rejection):
            report.rejected[verdict.reason.value] += 1
            rejects.append(
                {"sentence_id": verdict.sentence_id, "reason": verdict.reason.value}
            )
        else:
            report.accepted += 1
            sources.append(
                {
                    "sentence_id": record.sentence_id,
                    "focus_index": verdict.focus_index,
                    "focus_surface": verdict.focus_surface,
                }
            )
    write_jsonl(out_path, sources)
    write_jsonl(rejects_path, rejects)
    return report


def stage_perturb(
    sources_path: Path,
    sentences_path: Path,
    out_path: Path,
    gateway: ModelGateway,
    scan_cap: int,
    accept_cap: int,
) -> PerturbReport:
    sentences = load_sentences(sentences_path)
    lexicon = load_gendered_list(default_gendered_paths())
    first_names = load_first_names(default_first_names_path())
    totals = PerturbReport()
    rows: list[dict] = []
    for src_row in read_jsonl(sources_path):
        sentence = sentences.get(src_row["sentence_id"])
        if sentence is None:
            raise PipelineError(
                f"[perturb] source references missing sentence {src_row['sentence_id']}"
            )
        source = SourceSentence(
            sentence, src_row["focus_index"], src_row["focus_surface"]
        )
        try:
            pairs = perturb(
                source,
                gateway,
                lexicon,
                first_names,
                scan_cap=scan_cap,
                accept_cap=accept_cap,
                report=totals,
            )
        except Exception as exc:
            raise PipelineError(
                f"[perturb] {sentence.sentence_id}: {exc}"
            ) from exc
        for pair in pairs:
            rows.append(
                {
                    "pair_id": pair.pair_id,
                    "sentence_id": sentence.sentence_id,
                    "focus_index": source.focus_index,
                    "original": source.focus_surface,
                    "substitute": pair.substitute_surface,
                    "candidate_rank": pair.candidate_rank,
                    "mlm_score": pair.mlm_score,
                }
            )
    write_jsonl(out_path, rows)
    return totals


def stage_translate(
    pairs_path: Path,
    sentences_path: Path,
    out_path: Path,
    gateway: ModelGateway,
    languages: tuple[str, ...],
    workers: int = 8,
) -> int:
    sentences = load_sentences(sentences_path)
    pairs = load_pair_views(pairs_path)

    requests: list[tuple[str, str, str, str]] = []
    for pair in pairs:
        original = detokenize(pair.original_tokens(sentences))
        substituted = detokenize(pair.substituted_tokens(sentences))
        for lang in languages:
            requests.append((pair.pair_id, Side.ORIGINAL.value, lang, original))
            requests.append((pair.pair_id, Side.SUBSTITUTED.value, lang, substituted))

    def fetch(req: tuple[str, str, str, str]) -> str:
        pair_id, _, lang, text = req
        try:
            return gateway.translate(text, lang)
        except Exception as exc:
            raise PipelineError(f"[translate] {pair_id}/{lang}: {exc}") from exc

    if workers > 1 and len(requests) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            translations = list(pool.map(fetch, requests))
    else:
        translations = [fetch(req) for req in requests]

    rows = [
        {
            "pair_id": pair_id,
            "side": side,
            "lang": lang,
            "source_text": text,
            "text": translated,
            "tokens": tokenize(translated),
        }
        for (pair_id, side, lang, text), translated in zip(requests, translations)
    ]
    write_jsonl(out_path, rows)
    return len(rows)


def train_alignment_models(
    translations_path: Path,
    sentences_path: Path,
    pairs_path: Path,
    languages: tuple[str, ...],
    iterations: int,
    lam: float,
    p0: float,
) -> dict[str, alignment.AlignmentModel]:
    """One model per language over the deduplicated run bitext (both sides)."""
    sentences = load_sentences(sentences_path)
    pairs = {pair.pair_id: pair for pair in load_pair_views(pairs_path)}

    bitexts: dict[str, list[tuple[list[str], list[str]]]] = {
        lang: [] for lang in languages
    }
    seen: dict[str, set[tuple[tuple[str, ...], tuple[str, ...]]]] = {
        lang: set() for lang in languages
    }
    for row in read_jsonl(translations_path):
        lang = row["lang"]
        if lang not in bitexts:
            continue
        pair = pairs.get(row["pair_id"])
        if pair is None:
            raise PipelineError(
                f"[align] translation references unknown pair {row['pair_id']}"
            )
        if row["side"] == Side.ORIGINAL.value:
            src = pair.original_tokens(sentences)
        else:
            src = pair.substituted_tokens(sentences)
        key = (tuple(src), tuple(row["tokens"]))
        if key in seen[lang]:
            continue
        seen[lang].add(key)
        bitexts[lang].append((src, row["tokens"]))

    models: dict[str, alignment.AlignmentModel] = {}
    for lang in languages:
        if bitexts[lang]:
            models[lang] = alignment.em_train(
                bitexts[lang], iterations=iterations, lam=lam, p0=p0
            )
        else:
            models[lang] = alignment.AlignmentModel(
                lam=lam, p0=p0, iterations=iterations, table={}, log_likelihoods=[]
            )
    return models


def stage_align(
    translations_path: Path,
    sentences_path: Path,
    pairs_path: Path,
    model_path_for: dict[str, Path],
    out_path: Path,
    languages: tuple[str, ...],
    iterations: int,
    lam: float,
    p0: float,
) -> dict:
    models = train_alignment_models(
        translations_path, sentences_path, pairs_path, languages, iterations, lam, p0
    )
    for lang in languages:
        models[lang].save(model_path_for[lang])

    sentences = load_sentences(sentences_path)
    pairs = {pair.pair_id: pair for pair in load_pair_views(pairs_path)}
    rows: list[dict] = []
    projected = 0
    for row in read_jsonl(translations_path):
        lang = row["lang"]
        if lang not in models:
            continue
        pair = pairs[row["pair_id"]]
        if row["side"] == Side.ORIGINAL.value:
            src = pair.original_tokens(sentences)
        else:
            src = pair.substituted_tokens(sentences)
        tgt = list(row["tokens"])
        model = models[lang]
        try:
            focus = alignment.project_focus(model, src, pair.focus_index, tgt)
            links = alignment.viterbi_align(model, src, tgt)
        except Exception as exc:
            raise PipelineError(
                f"[align] {row['pair_id']}/{lang}: {exc}"
            ) from exc
        if focus.target_index is not None:
            projected += 1
        rows.append(
            {
                "pair_id": row["pair_id"],
                "side": row["side"],
                "lang": lang,
                "tokens": tgt,
                "target_index": focus.target_index,
                "posterior": focus.posterior,
                "links": alignment.pharaoh(links),
            }
        )
    write_jsonl(out_path, rows)
    return {"projections": len(rows), "projected": projected}


def stage_tag(
    projections_path: Path, out_path: Path, languages: tuple[str, ...]
) -> dict:
    taggers = {lang: GenderTagger(lang) for lang in languages}
    rows: list[dict] = []
    tagged = 0
    for row in read_jsonl(projections_path):
        lang = row["lang"]
        if lang not in taggers:
            continue
        gender: GenderTag | None = None
        if row["target_index"] is not None:
            try:
                gender = taggers[lang].tag(row["tokens"], row["target_index"])
            except Exception as exc:
                raise PipelineError(f"[tag] {row['pair_id']}/{lang}: {exc}") from exc
            tagged += 1
        outcome = TranslationOutcome(
            pair_id=row["pair_id"],
            side=Side(row["side"]),
            target_language=lang,
            translation_tokens=tuple(row["tokens"]),
            projected=ProjectedFocus(row["target_index"], row["posterior"]),
            gender=gender,
        )
        rows.append(outcome.to_json())
    write_jsonl(out_path, rows)
    return {"outcomes": len(rows), "tagged": tagged}


def stage_detect(
    outcomes_path: Path, out_path: Path, languages: tuple[str, ...] | None = None
) -> dict:
    by_key: dict[tuple[str, str], dict[str, TranslationOutcome]] = {}
    order: list[tuple[str, str]] = []
    for row in read_jsonl(outcomes_path):
        outcome = TranslationOutcome.from_json(row)
        if languages is not None and outcome.target_language not in languages:
            continue
        key = (outcome.pair_id, outcome.target_language)
        if key not in by_key:
            by_key[key] = {}
            order.append(key)
        by_key[key][outcome.side.value] = outcome

    def gender_of(outcome: TranslationOutcome) -> str | None:
        return None if outcome.gender is None else outcome.gender.value.value

    counts: dict[str, dict[str, int]] = {}
    rows: list[dict] = []
    for pair_id, lang in order:
        sides = by_key[(pair_id, lang)]
        missing = {s.value for s in Side} - set(sides)
        if missing:
            raise PipelineError(
                f"[detect] {pair_id}/{lang}: missing outcome side {sorted(missing)}"
            )
        label = classify(sides[Side.ORIGINAL.value], sides[Side.SUBSTITUTED.value])
        counts.setdefault(lang, {risk.value: 0 for risk in Risk})
        counts[lang][label.value.value] += 1
        rows.append(
            {
                "pair_id": pair_id,
                "language": lang,
                "label": label.value.value,
                "reason": label.reason,
                "genders": {
                    "original": gender_of(sides[Side.ORIGINAL.value]),
                    "substituted": gender_of(sides[Side.SUBSTITUTED.value]),
                },
            }
        )
    write_jsonl(out_path, rows)
    return counts


def stage_sample(
    risk_path: Path,
    pairs_path: Path,
    out_path: Path,
    n: int,
    seed: int,
    languages: tuple[str, ...],
) -> dict[str, int]:
    pairs = {pair.pair_id: pair for pair in load_pair_views(pairs_path)}
    eligible: dict[str, list[PairView]] = {lang: [] for lang in languages}
    for row in read_jsonl(risk_path):
        lang = row["language"]
        if lang in eligible and row["label"] == Risk.NOT_AT_RISK.value:
            eligible[lang].append(pairs[row["pair_id"]])

    rows: list[dict] = []
    counts: dict[str, int] = {}
    for lang in languages:
        lang_seed = negative_seed(seed, lang)
        drawn = sample_negatives(eligible[lang], n, lang_seed)
        counts[lang] = len(drawn)
        if len(drawn) < n:
            logger.warning(
                "negative population shortfall for %s: %d of %d", lang, len(drawn), n
            )
        for pair in drawn:
            rows.append({"language": lang, "pair_id": pair.pair_id})
    write_jsonl(out_path, rows)
    return counts


def assemble_records(
    sentences_path: Path,
    pairs_path: Path,
    outcomes_path: Path,
    risk_path: Path,
    negatives_path: Path,
    out_path: Path,
    seed: int,
) -> int:
    """Join all stage artifacts into full per-pair records, pair_id order."""
    sentences = load_sentences(sentences_path)
    pairs = load_pair_views(pairs_path)

    outcomes: dict[str, dict[str, dict[Side, TranslationOutcome]]] = {}
    for row in read_jsonl(outcomes_path):
        outcome = TranslationOutcome.from_json(row)
        per_pair = outcomes.setdefault(outcome.pair_id, {})
        per_pair.setdefault(outcome.target_language, {})[outcome.side] = outcome

    risk: dict[str, dict[str, RiskLabel]] = {}
    for row in read_jsonl(risk_path):
        risk.setdefault(row["pair_id"], {})[row["language"]] = RiskLabel(
            Risk(row["label"]), row["reason"]
        )

    negative_for: dict[str, list[str]] = {}
    for row in read_jsonl(negatives_path):
        negative_for.setdefault(row["pair_id"], []).append(row["language"])

    records = []
    for pair in sorted(pairs, key=lambda p: p.pair_id):
        pair_risk = risk.get(pair.pair_id, {})
        annotation = {
            lang: AnnotationState.PENDING
            for lang, label in pair_risk.items()
            if label.value is Risk.AT_RISK
        }
        records.append(
            ExampleRecord(
                pair_id=pair.pair_id,
                sentence_id=pair.sentence_id,
                focus_index=pair.focus_index,
                source_original=pair.original_tokens(sentences),
                source_substituted=pair.substituted_tokens(sentences),
                original_surface=pair.original,
                substitute_surface=pair.substitute,
                outcomes=outcomes.get(pair.pair_id, {}),
                risk=pair_risk,
                annotation_state=annotation,
                provenance={
                    "candidate_rank": pair.candidate_rank,
                    "mlm_score": pair.mlm_score,
                    "seed": seed,
                    "negative_for": sorted(negative_for.get(pair.pair_id, [])),
                },
            )
        )
    return write_jsonl(out_path, (record.to_json() for record in records))


def load_records(path: Path) -> list[ExampleRecord]:
    return [ExampleRecord.from_json(row) for row in read_jsonl(path)]


# ---------------------------------------------------------------------------
# Runner


def bundled_data_digests() -> dict[str, str]:
    """Digest every vendored word list, lexicon, and rule file."""
    paths = list(default_gendered_paths()) + [default_first_names_path()]
    for lang in LANGUAGES:
        paths.extend(default_lexicon_paths(lang))
        paths.append(default_rules_path(lang))
    return {path.name: file_digest(path) for path in sorted(set(paths))}


class PipelineRunner:
    def __init__(self, run_dir: Path | str, config: PipelineConfig):
        self.paths = RunPaths(run_dir)
        self.config = config
        self._gateway: ModelGateway | None = None

    @property
    def gateway(self) -> ModelGateway:
        if self._gateway is None:
            urls = resolve_backend_urls(self.config.backends)
            cache_dir = self.paths.cache_dir if self.config.cache else None
            self._gateway = ModelGateway.from_urls(urls, cache_dir=cache_dir)
        return self._gateway

    # State bookkeeping -----------------------------------------------------

    def _load_state(self) -> dict:
        if not self.paths.state.is_file():
            return {"config": self.config.digest(), "stages": {}}
        state = json.loads(self.paths.state.read_text(encoding="utf-8"))
        if state.get("config") != self.config.digest():
            raise ConfigurationError(
                "run directory was started with a different config; "
                "use a fresh --run-dir"
            )
        return state

    def _save_state(self, state: dict) -> None:
        tmp = self.paths.state.with_suffix(".tmp")
        tmp.write_text(
            json.dumps(state, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        os.replace(tmp, self.paths.state)

    def _stage_current(self, state: dict, stage: str) -> bool:
        entry = state["stages"].get(stage)
        if not entry:
            return False
        for rel, digest in entry["artifacts"].items():
            path = self.paths.run_dir / rel
            if not path.is_file() or file_digest(path) != digest:
                return False
        return True

    def _record_stage(self, state: dict, stage: str, counts: dict) -> None:
        artifacts = {}
        for path in self.paths.stage_artifacts(stage, self.config.languages):
            rel = str(path.relative_to(self.paths.run_dir))
            artifacts[rel] = file_digest(path)
        state["stages"][stage] = {"artifacts": artifacts, "counts": counts}
        self._save_state(state)

    # Stage dispatch ----------------------------------------------------------

    def _run_stage(self, stage: str) -> dict:
        paths, config = self.paths, self.config
        if stage == "ingest":
            if not config.input:
                raise ConfigurationError("no input corpus configured")
            report = stage_ingest(
                Path(config.input),
                config.input_format,
                paths.sentences(),
                config.max_tokens,
            )
            return report.to_json()
        if stage == "filter":
            report = stage_filter(
                paths.sentences(), paths.sources(), paths.rejects(), self.gateway
            )
            return report.to_json()
        if stage == "perturb":
            report = stage_perturb(
                paths.sources(),
                paths.sentences(),
                paths.pairs(),
                self.gateway,
                config.scan_cap,
                config.accept_cap,
            )
            return report.to_json()
        if stage == "translate":
            count = stage_translate(
                paths.pairs(),
                paths.sentences(),
                paths.translations(),
                self.gateway,
                config.languages,
                config.translate_workers,
            )
            return {"translations": count}
        if stage == "align":
            return stage_align(
                paths.translations(),
                paths.sentences(),
                paths.pairs(),
                {lang: paths.align_model(lang) for lang in config.languages},
                paths.projections(),
                config.languages,
                config.iterations,
                config.em_lambda,
                config.null_prob,
            )
        if stage == "tag":
            return stage_tag(
                paths.projections(), paths.outcomes(), config.languages
            )
        if stage == "detect":
            return stage_detect(paths.outcomes(), paths.risk())
        if stage == "sample":
            counts = stage_sample(
                paths.risk(),
                paths.pairs(),
                paths.negatives(),
                config.negatives,
                config.seed,
                config.languages,
            )
            records = assemble_records(
                paths.sentences(),
                paths.pairs(),
                paths.outcomes(),
                paths.risk(),
                paths.negatives(),
                paths.records(),
                config.seed,
            )
            return {"negatives": counts, "records": records}
        raise ValueError(f"unknown stage: {stage}")

    def run(self, until: str | None = None) -> dict:
        """Execute stages in order (resuming past completed ones)."""
        if until is not None and until not in STAGES:
            raise ValueError(f"unknown stage: {until}")
        started = utc_now()
        with run_lock(self.paths):
            self.paths.artifacts.mkdir(parents=True, exist_ok=True)
            state = self._load_state()
            for stage in STAGES:
                if self._stage_current(state, stage):
                    logger.info("stage %s: up to date, skipping", stage)
                else:
                    logger.info("stage %s: running", stage)
                    counts = self._run_stage(stage)
                    self._record_stage(state, stage, counts)
                    logger.info("stage %s: %s", stage, counts)
                if stage == until:
                    break
            manifest = self._build_manifest(state, started)
            if until is None:
                self._write_manifest(manifest)
            return manifest

    def _build_manifest(self, state: dict, started: str) -> dict:
        stage_counts = {
            stage: entry["counts"] for stage, entry in state["stages"].items()
        }
        try:
            backends = self.gateway.identities()
        except ValueError:
            backends = {}
        return {
            "config": self.config.to_json(),
            "config_digest": self.config.digest(),
            "backends": backends,
            "word_lists": bundled_data_digests(),
            "seeds": {
                "run": self.config.seed,
                "negatives": {
                    lang: negative_seed(self.config.seed, lang)
                    for lang in self.config.languages
                },
            },
            "counts": stage_counts,
            "timestamps": {"started_at": started, "finished_at": utc_now()},
        }

    def _write_manifest(self, manifest: dict) -> None:
        self.paths.manifest.write_text(
            json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )


def run_pipeline(run_dir: Path | str, config: PipelineConfig) -> dict:
    return PipelineRunner(run_dir, config).run()
