"""Command-line front door.

Subcommands: ``extract`` (publication text to a ``.study`` file through a
completion client), ``validate`` (check a graph's invariants), ``compare``
(diff an extracted graph against its corrected form), ``report`` (error
table over a finalized dataset), ``score`` (coverage of a reproduction
attempt), ``serve`` (run the review service).

Exit codes: 0 on success, 1 when the operation itself fails (invalid graph,
exhausted extraction, missing data), 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .canonical import ParseFailure, parse_graph, serialize_graph
from .coverage import CoverageError, parse_attempt, explain_score, score_reproduction
from .extraction import (
    ENDPOINT_ENV,
    DocumentSource,
    ExtractionConfig,
    ExtractionExhausted,
    HttpCompletionClient,
    MockCompletionClient,
    TransportError,
    default_bundle,
    extract_study,
    load_bundle,
)
from .metrics import (
    EmptyPopulationError,
    aggregate_reports,
    compare_graphs,
    correction_set_doc,
    likert_summary,
    likert_to_table,
    populations_for,
)
from .model import validate_graph
from .service import DATA_DIR_ENV, create_app, resolve_data_dir
from .session import SessionStore


def _read_graph(path: str):
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def _cmd_extract(args: argparse.Namespace) -> int:
    doc_path = Path(args.document)
    body = doc_path.read_text(encoding="utf-8")
    source_id = args.source_id or doc_path.stem
    doc = DocumentSource(source_id=source_id, body=body)

    bundle = load_bundle(Path(args.prompt)) if args.prompt else default_bundle()
    config = ExtractionConfig(
        model_name=args.model,
        temperature=args.temperature,
        max_repair_attempts=args.max_repair_attempts,
    )

    if args.mock_responses:
        responses = json.loads(
            Path(args.mock_responses).read_text(encoding="utf-8"))
        if (not isinstance(responses, list)
                or not all(isinstance(r, str) for r in responses)):
            return _fail("mock responses file must hold a JSON array of "
                         "strings")
        client = MockCompletionClient(responses)
    elif os.environ.get(ENDPOINT_ENV):
        client = HttpCompletionClient()
    else:
        return _fail(f"no completion provider: set {ENDPOINT_ENV} or pass "
                     "--mock-responses")

    run_dir = Path(args.run_dir) if args.run_dir else None
    try:
        graph, log = extract_study(doc, bundle, config, client,
                                   run_dir=run_dir)
    except ExtractionExhausted as exc:
        if args.log:
            Path(args.log).write_text(
                json.dumps(exc.log.to_doc(), ensure_ascii=False, indent=2),
                encoding="utf-8")
        return _fail(f"extraction exhausted after {exc.log.call_count} "
                     "attempts")
    except TransportError as exc:
        return _fail(f"transport failure: {exc}")

    text = serialize_graph(graph)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output} ({log.call_count} attempt(s))",
              file=sys.stderr)
    else:
        sys.stdout.write(text)
    if args.log:
        Path(args.log).write_text(
            json.dumps(log.to_doc(), ensure_ascii=False, indent=2),
            encoding="utf-8")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        graph = parse_graph(Path(args.file).read_text(encoding="utf-8"),
                            strict=not args.lenient)
    except ParseFailure as exc:
        return _fail(str(exc))
    report = validate_graph(graph)
    for violation in report.violations:
        where = violation.element_id or "<graph>"
        print(f"error {violation.code.value} {where}: {violation.message}")
    for warning in report.warnings:
        where = warning.element_id or "<graph>"
        print(f"warning {warning.code.value} {where}: {warning.message}")
    if report.ok:
        print(f"ok: {graph.study_id} ({len(graph.hypotheses)} hypotheses, "
              f"{len(graph.experiments)} experiments, "
              f"{len(graph.interpretations)} interpretations)")
        return 0
    return 1


def _cmd_compare(args: argparse.Namespace) -> int:
    extracted = _read_graph(args.extracted)
    corrected = _read_graph(args.corrected)
    corrections = compare_graphs(extracted, corrected,
                                 value_tolerance=args.value_tolerance)
    json.dump(correction_set_doc(corrections), sys.stdout,
              ensure_ascii=False, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    store = SessionStore(Path(args.dataset_dir))
    pairs = store.finalized_pairs()
    if not pairs:
        return _fail(f"no finalized studies under {args.dataset_dir}")
    try:
        populations = populations_for([c for _, c in pairs])
    except EmptyPopulationError as exc:
        return _fail(str(exc))
    corrections = [compare_graphs(e, c) for e, c in pairs]
    report = aggregate_reports(corrections, populations)
    sys.stdout.write(report.to_table())
    if args.likert:
        ratings = store.finalized_ratings()
        if ratings:
            sys.stdout.write("\n")
            sys.stdout.write(likert_to_table(likert_summary(ratings)))
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    graph = _read_graph(args.study)
    attempt = parse_attempt(Path(args.attempt).read_text(encoding="utf-8"))
    try:
        score = score_reproduction(graph, attempt)
    except CoverageError as exc:
        return _fail(str(exc))
    print(f"interpretations_upheld\t{score.interpretations_upheld:.4f}")
    print(f"hypotheses_supported\t{score.hypotheses_supported:.4f}")
    print(f"experiments_reproduced\t{score.experiments_reproduced:.4f}")
    if args.explain:
        for entry in explain_score(graph, attempt):
            print(f"{entry.element_id}\t{entry.status}\t{entry.reason}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    app = create_app(data_dir=args.dataset_dir, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# --------------------------------------------------------------------------
# Parser wiring
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reprograph",
        description="Study graphs for empirical AI publications: extraction, "
                    "validation, correction metrics, reproduction scoring, "
                    "and the review service.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract",
                       help="extract a study graph from publication text")
    p.add_argument("document", help="plain-text publication file")
    p.add_argument("--source-id", default=None,
                   help="study id (default: document file stem)")
    p.add_argument("--prompt", default=None,
                   help="prompt bundle JSON (default: packaged bundle)")
    p.add_argument("--model", default="default-model")
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--max-repair-attempts", type=int, default=2)
    p.add_argument("--mock-responses", default=None,
                   help="JSON array of scripted completions (offline mode)")
    p.add_argument("--run-dir", default=None,
                   help="directory for raw prompt/response transcripts")
    p.add_argument("--output", default=None,
                   help="write the .study file here instead of stdout")
    p.add_argument("--log", default=None,
                   help="write the extraction log JSON here")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("validate", help="check a .study file's invariants")
    p.add_argument("file")
    p.add_argument("--lenient", action="store_true",
                   help="preserve unknown fields instead of rejecting them")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("compare",
                       help="diff an extracted graph against its corrected "
                            "form")
    p.add_argument("extracted")
    p.add_argument("corrected")
    p.add_argument("--value-tolerance", type=float, default=0.0,
                   help="absolute tolerance for result-value equality")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("report",
                       help="error table over a finalized dataset directory")
    p.add_argument("dataset_dir")
    p.add_argument("--likert", action="store_true",
                   help="append the rating distribution table")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("score",
                       help="coverage of a reproduction attempt over a study")
    p.add_argument("study", help=".study file")
    p.add_argument("attempt", help=".attempt file")
    p.add_argument("--explain", action="store_true",
                   help="per-element status lines")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("serve", help="run the review session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--dataset-dir", default=None,
                   help=f"dataset directory (default: ${DATA_DIR_ENV} or "
                        f"{resolve_data_dir()!s})")
    p.add_argument("--static-dir", default=None,
                   help="static assets to serve at /ui")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail(f"file not found: {exc.filename}")
    except ValueError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
