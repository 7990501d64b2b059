"""Command-line entry point: join, reconstruct, evaluate, report.

Exit codes: 0 success, 2 unusable input (parse/config/credential errors,
with file and line in the message), 3 empty join intersection, 4 one or
more tracks still failed after retries (partial output and manifest are
kept so the run can be retried).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import statistics
import sys
from pathlib import Path

from lyrecon import backend as be
from lyrecon import evaluation as ev
from lyrecon import metadata as md
from lyrecon import mood as mood_mod
from lyrecon.analysis import load_lexicon, segment
from lyrecon.bow import load_bow
from lyrecon.errors import LyreconError
from lyrecon.pipeline import (
    CorpusEntry,
    RunManifest,
    corpus_entry_line,
    file_digest,
    read_corpus,
    read_records,
    recover_corpus_file,
    rewrite_corpus_in_order,
    write_records,
)
from lyrecon.prompt import build_prompt

STATS_FIELDS = tuple(f.name for f in dataclasses.fields(ev.CorpusStats))


def _fail(message: str) -> int:
    print(f"lyrecon: error: {message}", file=sys.stderr)
    return 2


# --- join -------------------------------------------------------------------

def cmd_join(args: argparse.Namespace) -> int:
    try:
        mood_table = (
            mood_mod.load_mood_table(args.mood_table)
            if args.mood_table
            else mood_mod.default_mood_table()
        )
    except (LyreconError, OSError) as exc:
        source = args.mood_table or "default mood table"
        return _fail(f"{source}: {exc}")
    stages = [
        ("bow", args.bow, lambda fh: load_bow(fh)),
        ("mood", args.mood,
         lambda fh: md.parse_mood_table(fh, md.ColumnMap.parse(args.mood_columns))),
        ("genres", args.genres, lambda fh: md.parse_genre_table(fh)),
        ("meta", args.meta,
         lambda fh: md.parse_track_meta(fh, md.ColumnMap.parse(args.meta_columns))),
    ]
    parsed = {}
    for name, path, parse in stages:
        try:
            with open(path, encoding="utf-8", newline="") as fh:
                parsed[name] = parse(fh)
        except (LyreconError, OSError, ValueError) as exc:
            return _fail(f"{path}: {exc}")
    records, report = md.join_records(
        parsed["bow"], parsed["mood"], parsed["genres"], parsed["meta"], mood_table
    )
    print(report.render())
    Path(str(args.out) + ".report.json").write_text(
        json.dumps(dataclasses.asdict(report), indent=2) + "\n", encoding="utf-8"
    )
    if not records:
        print("lyrecon: no track appears in all four inputs", file=sys.stderr)
        return 3
    write_records(records, args.out)
    print(f"wrote {len(records)} record(s) to {args.out}")
    return 0


# --- reconstruct ------------------------------------------------------------

_CONFIG_KEYS = (
    "backend", "endpoint", "model", "temperature", "max_output_tokens",
    "timeout", "max_attempts", "backoff_base", "max_in_flight",
    "cache_dir", "max_vocabulary_words",
)


def _build_backend_config(args: argparse.Namespace) -> tuple[be.BackendConfig, dict]:
    """Merge flags over the optional config file over built-in defaults."""
    settings: dict = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        unknown = set(data) - set(_CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        settings.update(data)
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    kind = settings.get("backend", "mock")
    config = be.BackendConfig(
        kind=kind,
        endpoint=settings.get("endpoint", ""),
        model=settings.get("model", "mock-lyricist" if kind == "mock" else "gpt-4o"),
        temperature=float(settings.get("temperature", 0.7)),
        max_output_tokens=int(settings.get("max_output_tokens", 1024)),
        timeout=float(settings.get("timeout", 60.0)),
        max_attempts=int(settings.get("max_attempts", 3)),
        backoff_base=float(settings.get("backoff_base", 1.0)),
        max_in_flight=int(settings.get("max_in_flight", 4)),
    )
    return config, settings


def cmd_reconstruct(args: argparse.Namespace) -> int:
    try:
        config, settings = _build_backend_config(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        return _fail(f"bad configuration: {exc}")
    try:
        be.require_credential(config)  # before any state is created
    except be.AuthMissing as exc:
        return _fail(str(exc))
    try:
        records = read_records(args.records)
    except (LyreconError, OSError) as exc:
        return _fail(f"{args.records}: {exc}")
    if not records:
        return _fail(f"{args.records}: no records to reconstruct")

    out = Path(args.out)
    manifest_path = Path(str(out) + ".manifest")
    cap = settings.get("max_vocabulary_words")
    # the vocabulary cap changes prompt text, so it is part of run identity
    config_digest = hashlib.sha256(
        f"{config.digest()}:cap={cap}".encode("utf-8")
    ).hexdigest()
    records_digest = file_digest(args.records)
    try:
        if manifest_path.exists():
            manifest = RunManifest.load(manifest_path, config_digest, records_digest)
            entries = recover_corpus_file(out)
        else:
            if out.exists() and out.stat().st_size > 0:
                return _fail(
                    f"{out}: exists without a manifest; refusing to append to it"
                )
            manifest = RunManifest.create(
                manifest_path, config_digest, records_digest, len(records)
            )
            entries = []
    except (LyreconError, OSError) as exc:
        return _fail(str(exc))

    record_ids = [r.track_id for r in records]
    known = set(record_ids)
    stray = [e.track_id for e in entries if e.track_id not in known]
    if stray:
        return _fail(f"{out}: holds track(s) not in the records file: {stray[:3]}")
    present = {e.track_id for e in entries}
    pending = [r for r in records if r.track_id not in present]

    cache_dir = settings.get("cache_dir") or str(out) + ".cache"
    cache = be.LyricsCache(cache_dir)
    prompts = [build_prompt(r, cap) for r in pending]

    failed: list[be.BatchItem] = []
    with manifest:
        # heal the write-ahead gap: output line present, done line missing
        for track_id in (tid for tid in record_ids
                         if tid in present and manifest.status.get(tid) != "done"):
            manifest.done(track_id)
        with open(out, "a", encoding="utf-8") as fh:

            def write_item(item: be.BatchItem) -> None:
                if item.result is not None:
                    entry = CorpusEntry(
                        track_id=item.result.track_id,
                        prompt_digest=item.result.prompt_digest,
                        model=item.result.model,
                        created_at=item.result.created_at,
                        lyrics=item.result.lyrics,
                    )
                    fh.write(corpus_entry_line(entry) + "\n")
                    fh.flush()
                    manifest.done(item.track_id)
                else:
                    manifest.failed(item.track_id, item.error or "unknown")
                    failed.append(item)

            be.run_batch(prompts, config, cache, on_item=write_item)

    counts = manifest.counts()
    print(
        f"reconstructed {len(pending) - len(failed)} track(s), "
        f"{len(records) - len(pending)} already done, {len(failed)} failed"
    )
    if failed:
        for item in failed:
            print(f"lyrecon: failed {item.track_id}: {item.error}", file=sys.stderr)
        print(
            f"lyrecon: {counts['failed']} track(s) failed; manifest and partial "
            f"output kept at {out}",
            file=sys.stderr,
        )
        return 4
    rewrite_corpus_in_order(out, record_ids)
    print(f"corpus complete: {counts['done']} record(s) in {out}")
    return 0


# --- evaluate ---------------------------------------------------------------

def _write_stats_json(stats: ev.CorpusStats, path: Path) -> None:
    path.write_text(
        json.dumps(dataclasses.asdict(stats), indent=2) + "\n", encoding="utf-8"
    )


def _read_stats_json(path: Path | str) -> ev.CorpusStats:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    missing = [k for k in STATS_FIELDS if k not in data]
    if missing:
        raise LyreconError(f"{path}: missing stats fields {missing}")
    return ev.CorpusStats(**{k: data[k] for k in STATS_FIELDS})


def _fidelity_report(entries, bow_path: str, out_dir: Path) -> float:
    with open(bow_path, encoding="utf-8") as fh:
        corpus = load_bow(fh)
    tracks = corpus.by_track_id()
    rows = []
    coverages = []
    correlations = []
    for entry in entries:
        track = tracks.get(entry.track_id)
        if track is None:
            continue
        doc = segment(entry.lyrics)
        coverage = ev.bow_coverage(doc, track, corpus.vocab)
        coverages.append(coverage)
        try:
            rho = ev.frequency_fidelity(doc, track, corpus.vocab)
            correlations.append(rho)
            rho_text = f"{rho:.6f}"
        except ev.InsufficientOverlap:
            rho_text = "n/a"
        rows.append(f"{entry.track_id}\t{coverage:.6f}\t{rho_text}")
    if not coverages:
        raise LyreconError(f"{bow_path}: no corpus track matches the BoW file")
    (out_dir / "fidelity.tsv").write_text(
        "track_id\tcoverage\trank_correlation\n" + "\n".join(rows) + "\n",
        encoding="utf-8",
    )
    mean_coverage = sum(coverages) / len(coverages)
    summary = {
        "tracks_scored": len(coverages),
        "mean_coverage": mean_coverage,
        "rank_correlation_scored": len(correlations),
        "mean_rank_correlation": (
            statistics.mean(correlations) if correlations else None
        ),
    }
    (out_dir / "fidelity_summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    return mean_coverage


def cmd_evaluate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        abstract_lex = load_lexicon(args.abstract_lexicon, "abstract")
        concrete_lex = load_lexicon(args.concrete_lexicon, "concrete")
    except (LyreconError, OSError) as exc:
        return _fail(str(exc))
    try:
        entries = read_corpus(args.corpus)
        docs = [segment(e.lyrics) for e in entries]
        stats = ev.corpus_stats(docs, abstract_lex, concrete_lex)
    except (LyreconError, OSError) as exc:
        return _fail(f"{args.corpus}: {exc}")
    _write_stats_json(stats, out_dir / "stats.json")

    if args.reference:
        try:
            ref_entries = read_corpus(args.reference)
            ref_docs = [segment(e.lyrics) for e in ref_entries]
            ref_stats = ev.corpus_stats(ref_docs, abstract_lex, concrete_lex)
        except (LyreconError, OSError) as exc:
            return _fail(f"{args.reference}: {exc}")
        _write_stats_json(ref_stats, out_dir / "stats_reference.json")
        report = ev.compare(stats, ref_stats)
        text = ev.render_comparison_text(report, args.label, args.reference_label)
        (out_dir / "report.txt").write_text(text, encoding="utf-8")
        (out_dir / "report.tsv").write_text(
            ev.render_comparison_tsv(report), encoding="utf-8"
        )
    else:
        (out_dir / "report.txt").write_text(
            ev.render_stats_text(stats, args.label), encoding="utf-8"
        )

    print(f"lyric sets: {stats.lyric_set_count}")
    if args.bow:
        try:
            mean_coverage = _fidelity_report(entries, args.bow, out_dir)
        except (LyreconError, OSError) as exc:
            return _fail(str(exc))
        print(f"mean bow_coverage: {mean_coverage:.6f}")
    print(f"reports written to {out_dir}")
    return 0


# --- report -----------------------------------------------------------------

def cmd_report(args: argparse.Namespace) -> int:
    try:
        left = _read_stats_json(args.left)
        right = _read_stats_json(args.right)
    except (LyreconError, OSError, ValueError, TypeError) as exc:
        return _fail(str(exc))
    report = ev.compare(left, right)
    text = ev.render_comparison_text(report, args.left_label, args.right_label)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(text, encoding="utf-8")
    (out_dir / "report.tsv").write_text(
        ev.render_comparison_tsv(report), encoding="utf-8"
    )
    print(text, end="")
    return 0


# --- parser -----------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lyrecon",
        description="Rebuild lyric corpora from Bag-of-Words datasets and "
        "aligned metadata, then evaluate the result.",
    )
    sub = parser.add_subparsers(dest="command")

    p_join = sub.add_parser(
        "join", help="inner-join BoW + mood + genre + meta into records"
    )
    p_join.add_argument("--bow", required=True, help="BoW dataset file")
    p_join.add_argument("--mood", required=True, help="valence/arousal CSV")
    p_join.add_argument("--genres", required=True, help="track_id<TAB>genre file")
    p_join.add_argument("--meta", required=True, help="artist/title CSV")
    p_join.add_argument("--mood-table", default=None,
                        help="mood arc table (default: packaged octants)")
    p_join.add_argument("--mood-columns", default="track_id,valence,arousal",
                        help="id,valence,arousal column names")
    p_join.add_argument("--meta-columns", default="track_id,artist,title",
                        help="id,artist,title column names")
    p_join.add_argument("--out", "-o", required=True, help="records file to write")
    p_join.set_defaults(func=cmd_join)

    p_rec = sub.add_parser("reconstruct", help="generate lyrics for joined records")
    p_rec.add_argument("--records", required=True, help="records file from join")
    p_rec.add_argument("--out", "-o", required=True, help="corpus file to write")
    p_rec.add_argument("--backend", choices=("mock", "live"), default=None)
    p_rec.add_argument("--endpoint", default=None, help="chat-completion URL")
    p_rec.add_argument("--model", default=None)
    p_rec.add_argument("--temperature", type=float, default=None)
    p_rec.add_argument("--max-output-tokens", type=int, default=None)
    p_rec.add_argument("--timeout", type=float, default=None)
    p_rec.add_argument("--max-attempts", type=int, default=None)
    p_rec.add_argument("--backoff-base", type=float, default=None)
    p_rec.add_argument("--max-in-flight", type=int, default=None)
    p_rec.add_argument("--cache-dir", default=None,
                       help="content-addressed result cache (default: <out>.cache)")
    p_rec.add_argument("--max-vocabulary-words", type=int, default=None,
                       help="truncate each prompt's vocabulary tail")
    p_rec.add_argument("--config", default=None,
                       help="JSON file with defaults for the flags above")
    p_rec.set_defaults(func=cmd_reconstruct)

    p_eval = sub.add_parser("evaluate", help="corpus statistics and fidelity metrics")
    p_eval.add_argument("--corpus", required=True, help="corpus file to evaluate")
    p_eval.add_argument("--reference", default=None,
                        help="second corpus for a side-by-side report")
    p_eval.add_argument("--abstract-lexicon", required=True)
    p_eval.add_argument("--concrete-lexicon", required=True)
    p_eval.add_argument("--bow", default=None,
                        help="BoW file for per-track coverage/fidelity")
    p_eval.add_argument("--label", default="Reconstructed")
    p_eval.add_argument("--reference-label", default="Original")
    p_eval.add_argument("--out-dir", "-o", required=True)
    p_eval.set_defaults(func=cmd_evaluate)

    p_rep = sub.add_parser("report", help="render a comparison from saved stats")
    p_rep.add_argument("--left", required=True, help="stats.json")
    p_rep.add_argument("--right", required=True, help="stats.json")
    p_rep.add_argument("--left-label", default="Reconstructed")
    p_rep.add_argument("--right-label", default="Original")
    p_rep.add_argument("--out-dir", "-o", required=True)
    p_rep.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
