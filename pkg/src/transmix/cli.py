"""Command-line front-end and end-to-end stage orchestration.

Exit codes: 0 on success, 1 on a stage failure (partial artifacts retained
with a FAILED marker), 2 on usage or configuration errors. Every stage
directory gets the resolved config snapshot and a stage manifest, so runs
are reproducible and auditable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import dedup as dedup_mod
from . import mixer as mixer_mod
from . import pack as pack_mod
from . import probe as probe_mod
from . import quality as quality_mod
from . import translate as translate_mod
from .config import ConfigError, PipelineConfig, load_config
from .corpus import read_corpus, read_header, write_corpus
from .mixer import MixtureEntry, MixtureSpec, derive_seed
from .segment import chunk_document, set_default_abbreviation_dir


class StageFailure(RuntimeError):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transmix",
        description="Build balanced multilingual pretraining corpora.")
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="PATH", help="INI config file")
    shared.add_argument("--seed", type=int, help="global random seed")
    shared.add_argument("--workers", type=int, help="max in-flight requests")
    shared.add_argument("--strict", action="store_true",
                        help="abort on malformed input lines")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[shared],
                       help="per-language corpus statistics")
    p.add_argument("input")
    p.add_argument("--out", help="write the JSON report here instead of stdout")

    p = sub.add_parser("segment", parents=[shared],
                       help="sentence-split and chunk a corpus")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="chunk records (JSONL)")

    p = sub.add_parser("filter", parents=[shared],
                       help="quality-filter a corpus")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("dedup", parents=[shared],
                       help="near-duplicate removal")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--exact", action="store_true",
                   help="verify candidates with exact shingle Jaccard")

    p = sub.add_parser("translate", parents=[shared],
                       help="translate a corpus into the configured targets")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--restart", action="store_true")

    p = sub.add_parser("mix", parents=[shared],
                       help="balanced sample + shuffle the configured sources")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("pack", parents=[shared],
                       help="pack a corpus into a binary token file")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("probe", parents=[shared],
                       help="measure a backend's language prior")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("pipeline", parents=[shared],
                       help="filter -> dedup -> translate -> mix -> pack")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--restart", action="store_true")
    p.add_argument("--exact", action="store_true")
    return parser


def _apply_cli_overrides(config: PipelineConfig, args: argparse.Namespace) -> None:
    if args.seed is not None:
        config.seed = args.seed
    if args.workers is not None:
        config.max_in_flight = args.workers
        config.workers = args.workers
    if args.strict:
        config.strict = True


def _stage_dir(base: Path, name: str, config: PipelineConfig) -> Path:
    path = base / name
    path.mkdir(parents=True, exist_ok=True)
    config.write_snapshot(path / "resolved_config.json")
    failed = path / "FAILED"
    if failed.exists():
        failed.unlink()
    return path


def _write_manifest(stage_dir: Path, manifest: dict) -> None:
    (stage_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8")


# ---- stages ---------------------------------------------------------------

def run_stats(config: PipelineConfig, input_path: str, out: str | None) -> None:
    counter = config.make_counter()
    header = read_header(input_path)
    use_cached = bool(header) and header.get("tokenizer_fingerprint") == counter.fingerprint
    stats = corpus_mod.compute_stats(
        read_corpus(input_path, strict=config.strict), counter,
        use_cached_counts=use_cached)
    report = json.dumps(stats.to_report(), indent=2, ensure_ascii=False)
    if out:
        Path(out).write_text(report + "\n", encoding="utf-8")
    else:
        print(report)


def run_segment(config: PipelineConfig, input_path: str, out: str) -> None:
    counter = config.make_counter()
    with open(out, "w", encoding="utf-8") as fh:
        for doc in read_corpus(input_path, strict=config.strict):
            for chunk in chunk_document(doc, counter, config.chunk_limit):
                fh.write(json.dumps({
                    "doc_id": doc.id,
                    "index": chunk.index,
                    "token_count": chunk.token_count,
                    "sentences": len(chunk.sentences),
                    "text": chunk.text,
                }, ensure_ascii=False) + "\n")


def run_filter(config: PipelineConfig, input_path: str, stage_dir: Path) -> Path:
    kept_path = stage_dir / "kept.jsonl"
    rejected_path = stage_dir / "rejected.jsonl"
    counts = {"in": 0, "kept": 0, "rejected": 0}
    docs = read_corpus(input_path, strict=config.strict)
    pairs = quality_mod.filter_corpus(
        docs, config.quality, config.stopword_dir or None)
    with open(kept_path, "w", encoding="utf-8") as kept_fh, \
            open(rejected_path, "w", encoding="utf-8") as rej_fh:
        for doc, report in pairs:
            counts["in"] += 1
            if report.keep:
                counts["kept"] += 1
                kept_fh.write(doc.to_json() + "\n")
            else:
                counts["rejected"] += 1
                rej_fh.write(json.dumps({
                    "doc": json.loads(doc.to_json()),
                    "report": report.to_dict(),
                }, ensure_ascii=False) + "\n")
    _write_manifest(stage_dir, {
        "stage": "filter", **counts,
        "rules": list(config.quality.active_rules()),
    })
    return kept_path


def run_dedup(config: PipelineConfig, input_path: str, stage_dir: Path,
              exact: bool) -> Path:
    docs = list(read_corpus(input_path, strict=config.strict))
    result = dedup_mod.dedup_corpus(
        docs,
        threshold=config.dedup_threshold,
        seed=derive_seed(config.seed, "dedup"),
        exact=exact,
        bands=config.dedup_bands,
        rows=config.dedup_rows,
        shingle_size=config.shingle_size,
    )
    kept_path = stage_dir / "kept.jsonl"
    kept_ids = set(result.kept_ids)
    write_corpus(kept_path, (d for d in docs if d.id in kept_ids))
    result.write_manifest(stage_dir / "clusters.jsonl")
    _write_manifest(stage_dir, {
        "stage": "dedup", "in": len(docs), "kept": len(result.kept_ids),
        "removed": len(result.removed_ids), "clusters": len(result.clusters),
        **result.params,
    })
    return kept_path


def run_translate(config: PipelineConfig, input_path: str, stage_dir: Path,
                  resume: bool, restart: bool) -> dict[str, Path]:
    manifest = translate_mod.translate_corpus(
        input_path,
        targets=config.targets,
        backend=config.make_backend(),
        out_dir=stage_dir,
        template=config.make_template(),
        counter=config.make_counter(),
        chunk_limit=config.chunk_limit,
        params=config.generation_params(),
        resume=resume,
        restart=restart,
    )
    _write_manifest(stage_dir, {"stage": "translate",
                                **json.loads(manifest.to_json())})
    return {tgt: stage_dir / f"{tgt}.jsonl" for tgt in config.targets}


def run_mix(config: PipelineConfig, sources: list[tuple[str, str]],
            stage_dir: Path) -> Path:
    counter = config.make_counter()
    budget = config.mix_budget_per_source
    if budget <= 0:
        totals = []
        for _, path in sources:
            totals.append(sum(counter.count(d.text) for d in read_corpus(path)))
        if not totals:
            raise StageFailure("mix: no sources configured")
        budget = min(totals)
    spec = MixtureSpec(
        stage="mix",
        entries=[MixtureEntry(name=n, path=p, token_budget=budget)
                 for n, p in sources],
        seed=derive_seed(config.seed, "mix"),
    )
    mixed, manifest = mixer_mod.compose_stage(
        spec, counter, buffer_size=config.mix_buffer_size)
    out_path = stage_dir / "mixed.jsonl"
    write_corpus(out_path, mixed, tokenizer_fingerprint=counter.fingerprint)
    _write_manifest(stage_dir, manifest)
    return out_path


def run_pack(config: PipelineConfig, input_path: str, stage_dir: Path) -> Path:
    counter = config.make_counter()
    out_path = stage_dir / "tokens.bin"
    manifest = pack_mod.pack_stream(
        read_corpus(input_path, strict=config.strict), counter, out_path,
        sequence_length=config.sequence_length)
    if not manifest.identity_holds():
        raise StageFailure("pack: token conservation identity violated")
    manifest.write(stage_dir / "manifest.json")
    return out_path


def run_probe(config: PipelineConfig, stage_dir: Path) -> None:
    if config.probe_model_path:
        model = probe_mod.NgramLanguageModel.load(config.probe_model_path)
    else:
        model = probe_mod.train_langid()
    report, evidence = probe_mod.probe_prior(
        config.make_backend(), model,
        n=config.probe_n,
        max_tokens=config.probe_max_tokens,
        temperature=config.probe_temperature,
        seed=derive_seed(config.seed, "probe"),
    )
    (stage_dir / "prior_report.json").write_text(report.to_json() + "\n",
                                                 encoding="utf-8")
    with open(stage_dir / "translation_pairs.jsonl", "w", encoding="utf-8") as fh:
        for record in evidence:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    _write_manifest(stage_dir, {"stage": "probe",
                                **json.loads(report.to_json())})


def run_pipeline(config: PipelineConfig, input_path: str, out_dir: Path,
                 resume: bool, restart: bool, exact: bool) -> None:
    stale = out_dir / "FAILED"
    if stale.exists():
        stale.unlink()
    config.write_snapshot(out_dir / "resolved_config.json")
    kept = run_filter(config, input_path, _stage_dir(out_dir, "01_filter", config))
    kept = run_dedup(config, str(kept), _stage_dir(out_dir, "02_dedup", config),
                     exact=exact)
    sources: list[tuple[str, str]] = [("source", str(kept))]
    if config.translate_enabled and config.targets:
        translated = run_translate(
            config, str(kept), _stage_dir(out_dir, "03_translate", config),
            resume=resume, restart=restart)
        sources += [(tgt, str(path)) for tgt, path in sorted(translated.items())]
    mixed = run_mix(config, sources, _stage_dir(out_dir, "04_mix", config))
    run_pack(config, str(mixed), _stage_dir(out_dir, "05_pack", config))


# ---- entry point ----------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        _apply_cli_overrides(config, args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    set_default_abbreviation_dir(config.abbreviation_dir)

    stage_dir: Path | None = None
    try:
        if args.command == "stats":
            run_stats(config, args.input, args.out)
        elif args.command == "segment":
            run_segment(config, args.input, args.out)
        elif args.command == "filter":
            stage_dir = _stage_dir(Path(args.out_dir), ".", config)
            run_filter(config, args.input, stage_dir)
        elif args.command == "dedup":
            stage_dir = _stage_dir(Path(args.out_dir), ".", config)
            run_dedup(config, args.input, stage_dir, exact=args.exact)
        elif args.command == "translate":
            stage_dir = _stage_dir(Path(args.out_dir), ".", config)
            run_translate(config, args.input, stage_dir,
                          resume=args.resume, restart=args.restart)
        elif args.command == "mix":
            stage_dir = _stage_dir(Path(args.out_dir), ".", config)
            if not config.mix_sources:
                raise StageFailure("mix: configure [mix] sources = name:path,...")
            run_mix(config, config.mix_sources, stage_dir)
        elif args.command == "pack":
            stage_dir = _stage_dir(Path(args.out_dir), ".", config)
            run_pack(config, args.input, stage_dir)
        elif args.command == "probe":
            stage_dir = _stage_dir(Path(args.out_dir), ".", config)
            run_probe(config, stage_dir)
        elif args.command == "pipeline":
            stage_dir = Path(args.out_dir)
            stage_dir.mkdir(parents=True, exist_ok=True)
            run_pipeline(config, args.input, stage_dir,
                         resume=args.resume, restart=args.restart,
                         exact=args.exact)
    except Exception as exc:  # noqa: BLE001 - process boundary
        if isinstance(exc, ConfigError):
            print(str(exc), file=sys.stderr)
            return 2
        if stage_dir is not None:
            (stage_dir / "FAILED").write_text(f"{type(exc).__name__}: {exc}\n",
                                              encoding="utf-8")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
