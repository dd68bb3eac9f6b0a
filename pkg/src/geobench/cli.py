"""Operator command line.

Subcommands: validate, convert, run, search, serve. Exit codes: 0 success,
1 validation failure, 2 transport failure, 64 unknown subcommand.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .config import load_config
from .corpus import LineFormat, convert_line_corpus, parse_unified_corpus, serialize_corpus
from .errors import (
    ConversionError,
    CorpusParseError,
    CorpusValidationError,
    GazetteerError,
    GeobenchError,
    InvalidExperimentId,
    OutputContractError,
)
from .experiment import ExperimentStatus, find_experiment, run_experiment
from .gazetteer import Gazetteer, load_gazetteer
from .geoparse import GeoparserRef, ParserKind, build_runner, load_replay_fixture
from .metrics import METRIC_IDS
from .storage import CacheStore

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TRANSPORT = 2
EXIT_USAGE = 64

_SUBCOMMANDS = ("validate", "convert", "run", "search", "serve")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geobench", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p_validate = sub.add_parser("validate", help="check a corpus file against the format")
    p_validate.add_argument("corpus", help="path to a corpus XML file")

    p_convert = sub.add_parser("convert", help="convert a TSV/CSV corpus to corpus XML")
    p_convert.add_argument(
        "--format", required=True, choices=[f.value for f in LineFormat],
        help="input row layout",
    )
    p_convert.add_argument(
        "--map", required=True, dest="mapfile",
        help="JSON file mapping model fields (text, phrase, lon, lat, ...) to column names",
    )
    p_convert.add_argument("input", help="input TSV/CSV path")
    p_convert.add_argument("output", help="output XML path")

    p_run = sub.add_parser("run", help="run an experiment and write a report")
    p_run.add_argument("--corpus", action="append", required=True, metavar="PATH",
                       help="corpus XML file (repeatable)")
    p_run.add_argument(
        "--geoparser", action="append", required=True, metavar="SPEC",
        help='"gazpop", a REST endpoint URL, or "replay:<fixture.json>" (repeatable)',
    )
    p_run.add_argument("--metrics", default="all",
                       help='comma-separated metric ids or "all"')
    p_run.add_argument("--out", metavar="PATH", help="report JSON path (default stdout)")
    p_run.add_argument("--store", default="geobench.db",
                       help="store file for records and the parse cache")
    p_run.add_argument("--gazetteer", metavar="PATH",
                       help="gazetteer TSV (required with the gazpop geoparser)")
    p_run.add_argument("--parallelism", type=int, default=4)

    p_search = sub.add_parser("search", help="look up an archived experiment by id")
    p_search.add_argument("id", help="16-character experiment id")
    p_search.add_argument("--store", default="geobench.db")

    p_serve = sub.add_parser("serve", help="start the HTTP server")
    p_serve.add_argument("--config", metavar="PATH", help="config JSON path")

    return parser


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        raw = Path(args.corpus).read_bytes()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        corpus = parse_unified_corpus(raw)
    except (CorpusParseError, CorpusValidationError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(
        f"ok: corpus {corpus.id!r}, {len(corpus.entries)} entries, "
        f"{corpus.annotation_count()} annotations"
    )
    return EXIT_OK


def _cmd_convert(args: argparse.Namespace) -> int:
    try:
        column_map = json.loads(Path(args.mapfile).read_text(encoding="utf-8"))
        rows = Path(args.input).read_bytes()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except json.JSONDecodeError as exc:
        print(f"invalid map file: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        result = convert_line_corpus(
            rows, format=args.format, column_map=column_map,
            corpus_id=Path(args.input).stem,
        )
    except (ConversionError, CorpusValidationError) as exc:
        print(f"conversion failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    Path(args.output).write_bytes(serialize_corpus(result.corpus))
    report = result.report
    print(
        f"converted {report.rows_read} rows into {result.corpus.id!r}: "
        f"{report.entries_out} entries, {len(report.skipped)} skipped, "
        f"{len(report.warnings)} warnings"
    )
    for line in (*report.skipped, *report.warnings):
        print(f"  {line}", file=sys.stderr)
    return EXIT_OK


def _parser_specs(
    specs: list[str], gazetteer: Gazetteer | None, gazetteer_version: str
) -> list[tuple[GeoparserRef, dict]]:
    """Turn CLI geoparser specs into refs plus the context build_runner needs."""
    out: list[tuple[GeoparserRef, dict]] = []
    for spec in specs:
        if spec == "gazpop":
            if gazetteer is None:
                raise GeobenchError("the gazpop geoparser needs --gazetteer")
            ref = GeoparserRef(
                id="gazpop",
                display_name="Gazetteer + population baseline",
                kind=ParserKind.BUILTIN_GAZPOP,
                version=f"0.1.0+gaz.{gazetteer_version}",
            )
            out.append((ref, {"gazetteer": gazetteer}))
        elif spec.startswith("replay:"):
            path = Path(spec[len("replay:"):])
            raw = path.read_bytes()
            fixture = load_replay_fixture(raw)
            digest = hashlib.sha256(raw).hexdigest()[:8]
            ref = GeoparserRef(
                id=f"replay-{path.stem}",
                display_name=f"Replay of {path.name}",
                kind=ParserKind.REPLAY,
                version=digest,  # content-derived so fixture edits miss the cache
            )
            out.append((ref, {"fixture": fixture}))
        elif spec.startswith("http://") or spec.startswith("https://"):
            digest = hashlib.sha256(spec.encode("utf-8")).hexdigest()[:8]
            ref = GeoparserRef(
                id=f"rest-{digest}",
                display_name=spec,
                kind=ParserKind.REST,
                version="0",
                endpoint_url=spec,
            )
            out.append((ref, {}))
        else:
            raise GeobenchError(
                f"unrecognized geoparser spec {spec!r}: "
                'use "gazpop", an http(s) URL, or "replay:<path>"'
            )
    return out


def _cmd_run(args: argparse.Namespace) -> int:
    corpora = []
    try:
        for path in args.corpus:
            corpora.append(parse_unified_corpus(Path(path).read_bytes()))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CorpusParseError, CorpusValidationError) as exc:
        print(f"invalid corpus: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    gazetteer = None
    gazetteer_version = "none"
    if args.gazetteer:
        try:
            raw = Path(args.gazetteer).read_bytes()
            gazetteer, _ = load_gazetteer(raw)
            gazetteer_version = hashlib.sha256(raw).hexdigest()[:8]
        except (OSError, GazetteerError) as exc:
            print(f"gazetteer error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION

    if args.metrics == "all":
        metrics = list(METRIC_IDS)
    else:
        metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]

    try:
        specs = _parser_specs(args.geoparser, gazetteer, gazetteer_version)
    except (OSError, OutputContractError, GeobenchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    context = {ref.id: extra for ref, extra in specs}

    def runner_for(ref: GeoparserRef):
        return build_runner(ref, **context[ref.id])

    try:
        with CacheStore(args.store) as store:
            record = run_experiment(
                store,
                corpora,
                [ref for ref, _ in specs],
                metrics,
                runner_for,
                parallelism=args.parallelism,
            )
    except GeobenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    report = json.dumps(record.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)
    if args.out:
        Path(args.out).write_text(report + "\n", encoding="utf-8")
    else:
        print(report)

    if record.status is ExperimentStatus.FAILED:
        print(f"experiment failed: {record.failure_detail}", file=sys.stderr)
        return EXIT_TRANSPORT
    print(f"experiment {record.experiment_id} complete", file=sys.stderr)
    return EXIT_OK


def _cmd_search(args: argparse.Namespace) -> int:
    with CacheStore(args.store) as store:
        try:
            record = find_experiment(store, args.id)
        except InvalidExperimentId as exc:
            print(f"invalid id: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
    if record is None:
        print(f"no experiment with id {args.id}", file=sys.stderr)
        return EXIT_VALIDATION
    print(json.dumps(record.to_dict(), indent=2, sort_keys=True, ensure_ascii=False))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    try:
        cfg = load_config(args.config)
    except GeobenchError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    static_dir = Path("frontend/dist")
    app = create_app(config=cfg, static_dir=static_dir if static_dir.is_dir() else None)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    if not argv or (not argv[0].startswith("-") and argv[0] not in _SUBCOMMANDS):
        parser.print_usage(sys.stderr)
        if argv:
            print(f"unknown subcommand: {argv[0]}", file=sys.stderr)
        return EXIT_USAGE
    args = parser.parse_args(argv)
    if args.command == "validate":
        return _cmd_validate(args)
    if args.command == "convert":
        return _cmd_convert(args)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "search":
        return _cmd_search(args)
    return _cmd_serve(args)


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
