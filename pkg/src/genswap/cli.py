"""Command-line interface.

Every pipeline stage is exposed as a verb over explicit file paths, with
defaults wired to the --run-dir layout so the verbs compose with `run`.
`run` executes the whole pipeline with resume; `stats`, `export`, and
`serve` operate on a completed run directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import alignment
from .export import Quotas
from .gateway import GatewayError, ModelGateway, resolve_backend_urls
from .pipeline import (
    PipelineConfig,
    PipelineError,
    PipelineRunner,
    RunPaths,
    STAGES,
    load_config,
    load_pair_views,
    load_records,
    load_sentences,
    stage_align,
    stage_detect,
    stage_filter,
    stage_ingest,
    stage_perturb,
    stage_sample,
    stage_tag,
    stage_translate,
    train_alignment_models,
)
from .records import LANGUAGES, ConfigurationError, Side, read_jsonl, write_jsonl
from .review import make_server
from .stats import RatioGroup, compute_ratios, render_figures, top_forms, write_ratios_tsv

logger = logging.getLogger(__name__)


def _gateway(args, config: PipelineConfig) -> ModelGateway:
    urls = resolve_backend_urls(config.backends)
    paths = RunPaths(args.run_dir)
    cache_dir = paths.cache_dir if config.cache else None
    return ModelGateway.from_urls(urls, cache_dir=cache_dir)


def _artifact(args, value: str | None, accessor: str) -> Path:
    """Explicit path if given, else the --run-dir artifact location."""
    if value:
        return Path(value)
    return getattr(RunPaths(args.run_dir), accessor)()


def _config(args) -> PipelineConfig:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return load_config(args.config, overrides)


def _languages(args, config: PipelineConfig) -> tuple[str, ...]:
    lang = getattr(args, "lang", None)
    if lang:
        parts = tuple(part.strip() for part in lang.split(",") if part.strip())
        unknown = [p for p in parts if p not in LANGUAGES]
        if unknown:
            raise ConfigurationError(f"unsupported languages: {unknown}")
        return parts
    return config.languages


# ---------------------------------------------------------------------------
# Verb handlers


def cmd_ingest(args) -> int:
    report = stage_ingest(
        Path(args.input),
        args.format,
        _artifact(args, args.out, "sentences"),
        args.max_len,
    )
    print(json.dumps(report.to_json()))
    return 0


def cmd_filter(args) -> int:
    config = _config(args)
    report = stage_filter(
        _artifact(args, args.in_path, "sentences"),
        _artifact(args, args.out, "sources"),
        _artifact(args, args.rejects, "rejects"),
        _gateway(args, config),
    )
    print(json.dumps(report.to_json()))
    return 0


def cmd_perturb(args) -> int:
    config = _config(args)
    report = stage_perturb(
        _artifact(args, args.in_path, "sources"),
        _artifact(args, args.sentences, "sentences"),
        _artifact(args, args.out, "pairs"),
        _gateway(args, config),
        args.scan_cap,
        args.accept_cap,
    )
    print(json.dumps(report.to_json()))
    return 0


def cmd_translate(args) -> int:
    config = _config(args)
    count = stage_translate(
        _artifact(args, args.pairs, "pairs"),
        _artifact(args, args.sentences, "sentences"),
        _artifact(args, args.out, "translations"),
        _gateway(args, config),
        _languages(args, config),
        config.translate_workers,
    )
    print(json.dumps({"translations": count}))
    return 0


def cmd_align(args) -> int:
    config = _config(args)
    languages = _languages(args, config)
    translations = _artifact(args, args.translations, "translations")
    sentences_path = _artifact(args, args.sentences, "sentences")
    pairs_path = _artifact(args, args.pairs, "pairs")
    paths = RunPaths(args.run_dir)
    if args.mode == "train":
        models = train_alignment_models(
            translations,
            sentences_path,
            pairs_path,
            languages,
            args.iters,
            config.em_lambda,
            config.null_prob,
        )
        for lang, model in models.items():
            out = Path(args.model) if args.model else paths.align_model(lang)
            model.save(out)
            print(json.dumps({"lang": lang, "model": str(out)}))
        return 0

    # decode: emit focus projections using an existing model per language
    sentences = load_sentences(sentences_path)
    pairs = {pair.pair_id: pair for pair in load_pair_views(pairs_path)}
    models = {}
    for lang in languages:
        model_path = Path(args.model) if args.model else paths.align_model(lang)
        models[lang] = alignment.AlignmentModel.load(model_path)
    rows = []
    for row in read_jsonl(translations):
        lang = row["lang"]
        if lang not in models:
            continue
        pair = pairs[row["pair_id"]]
        if row["side"] == Side.ORIGINAL.value:
            src = pair.original_tokens(sentences)
        else:
            src = pair.substituted_tokens(sentences)
        tgt = list(row["tokens"])
        focus = alignment.project_focus(models[lang], src, pair.focus_index, tgt)
        links = alignment.viterbi_align(models[lang], src, tgt)
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
    count = write_jsonl(_artifact(args, args.out, "projections"), rows)
    print(json.dumps({"projections": count}))
    return 0


def cmd_tag_gender(args) -> int:
    config = _config(args)
    counts = stage_tag(
        _artifact(args, args.in_path, "projections"),
        _artifact(args, args.out, "outcomes"),
        _languages(args, config),
    )
    print(json.dumps(counts))
    return 0


def cmd_detect(args) -> int:
    config = _config(args)
    languages = _languages(args, config)
    counts = stage_detect(
        _artifact(args, args.in_path, "outcomes"),
        _artifact(args, args.out, "risk"),
        languages,
    )
    print(json.dumps(counts))
    return 0


def cmd_sample_negatives(args) -> int:
    config = _config(args)
    languages = _languages(args, config)
    counts = stage_sample(
        _artifact(args, args.risk, "risk"),
        _artifact(args, args.pairs, "pairs"),
        _artifact(args, args.out, "negatives"),
        args.n,
        args.seed if args.seed is not None else config.seed,
        languages,
    )
    print(json.dumps(counts))
    return 0


def cmd_stats(args) -> int:
    records = load_records(_artifact(args, args.records, "records"))
    positives = compute_ratios(records, RatioGroup.POSITIVE)
    negatives = compute_ratios(records, RatioGroup.NEGATIVE)
    out_dir = Path(args.out_dir) if args.out_dir else RunPaths(args.run_dir).stats_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    write_ratios_tsv(positives, out_dir / "ratios_positive.tsv")
    write_ratios_tsv(negatives, out_dir / "ratios_negative.tsv")
    figures = render_figures(positives, negatives, out_dir, top_k=args.top_k)
    for group_name, ratios in (("flagged", positives), ("unflagged", negatives)):
        for lang in sorted({r.language for r in ratios}):
            for ratio in top_forms(ratios, args.top_k, lang):
                print(f"{lang}\t{group_name}\t{ratio.form}\t{ratio.ratio_display}")
    logger.info("wrote %d figures to %s", len(figures), out_dir)
    return 0


def cmd_export(args) -> int:
    from .review import ReviewStore, export_from_store

    config = _config(args)
    paths = RunPaths(args.run_dir)
    quotas = Quotas(positives=config.quota_positives, negatives=config.quota_negatives)
    store = ReviewStore.from_run(args.run_dir, quota=config.quota_positives)
    out_dir = Path(args.out_dir) if args.out_dir else paths.exports_dir
    try:
        languages = _languages(args, config)
        for lang in languages:
            report = export_from_store(
                store, lang, out_dir, paths.negatives(), quotas
            )
            print(
                json.dumps(
                    {
                        "language": report.language,
                        "positives": report.positives,
                        "negatives": report.negatives,
                        "positive_shortfall": report.positive_shortfall,
                        "tsv": str(report.tsv_path),
                        "jsonl": str(report.jsonl_path),
                    }
                )
            )
    finally:
        store.close()
    return 0


def cmd_serve(args) -> int:
    config = _config(args)
    static_dir = Path(args.static_dir) if args.static_dir else None
    server = make_server(
        args.run_dir,
        port=args.port,
        host=args.host,
        quota=config.quota_positives,
        quotas=Quotas(
            positives=config.quota_positives, negatives=config.quota_negatives
        ),
        static_dir=static_dir,
        effective_annotator=args.annotator,
    )
    host, port = server.server_address[:2]
    logger.info("review service listening on http://%s:%s/", host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        server.store.close()  # type: ignore[attr-defined]
    return 0


def cmd_run(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.input is not None:
        overrides["input"] = args.input
    if args.format is not None:
        overrides["input_format"] = args.format
    config = load_config(args.config, overrides)
    runner = PipelineRunner(args.run_dir, config)
    manifest = runner.run(until=args.until)
    counts = manifest.get("counts", {})
    for stage in STAGES:
        if stage in counts:
            print(f"{stage}\t{json.dumps(counts[stage], ensure_ascii=False)}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genswap",
        description="Mine minimal sentence pairs that expose gendered "
        "translation behavior.",
    )
    parser.add_argument("--run-dir", default="run", help="run directory (default: run)")
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--seed", type=int, default=None, help="override the run seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("ingest", help="segment and tokenize a raw corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("txt", "jsonl"), default="txt")
    p.add_argument("--out", default=None)
    p.add_argument("--max-len", type=int, default=128)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("filter", help="keep sentences with one unnamed person noun")
    p.add_argument("--in", dest="in_path", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--rejects", default=None)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("perturb", help="generate masked-LM minimal pairs")
    p.add_argument("--in", dest="in_path", default=None)
    p.add_argument("--sentences", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--scan-cap", type=int, default=100)
    p.add_argument("--accept-cap", type=int, default=10)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("translate", help="translate both sides of every pair")
    p.add_argument("--pairs", default=None)
    p.add_argument("--sentences", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--lang", default=None, help="comma-separated target languages")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("align", help="train or decode the word aligner")
    p.add_argument("mode", choices=("train", "decode"))
    p.add_argument("--lang", default=None)
    p.add_argument("--iters", type=int, default=alignment.DEFAULT_ITERATIONS)
    p.add_argument("--translations", default=None)
    p.add_argument("--sentences", default=None)
    p.add_argument("--pairs", default=None)
    p.add_argument("--model", default=None, help="model path (single-language runs)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("tag-gender", help="tag projected focus tokens with gender")
    p.add_argument("--lang", default=None)
    p.add_argument("--in", dest="in_path", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_tag_gender)

    p = sub.add_parser("detect", help="label pairs by translation gender divergence")
    p.add_argument("--lang", default=None)
    p.add_argument("--in", dest="in_path", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sample-negatives", help="seeded draw of non-divergent pairs")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--lang", default=None)
    p.add_argument("--risk", default=None)
    p.add_argument("--pairs", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample_negatives)

    p = sub.add_parser("stats", help="per-form gender tallies, tables, and figures")
    p.add_argument("--records", default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--top-k", type=int, default=5)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="write the final dataset under quotas")
    p.add_argument("--lang", default=None)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="start the human review service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static-dir", default=None, help="review UI bundle directory")
    p.add_argument("--annotator", default="default")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("run", help="run the full pipeline with resume")
    p.add_argument("--input", default=None)
    p.add_argument("--format", choices=("txt", "jsonl"), default=None)
    p.add_argument("--until", choices=STAGES, default=None)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PipelineError, GatewayError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
