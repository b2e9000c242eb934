#!/usr/bin/env python3
"""
osd - interface en ligne de commande de Syndromo

Sous-commandes : validate, evaluate, render, stats, export-graph, compare,
fetch-dataset, rules. Les données sortent sur stdout, les diagnostics et la
progression sur stderr. Codes de sortie : 0 succès, 1 constats de validation
ou d'évaluation, 2 erreur d'usage, 3 erreur d'entrée/sortie.
"""

import argparse
import contextlib
import json
import logging
import os
import sys
from pathlib import Path
from typing import IO, ContextManager, Iterable, List, Optional, Tuple

from api.dataset_api import DatasetDownloader
from config.osd_config import EXIT_CODES, LOG_LEVEL, WORKERS
from utils.compare import load_aliases, record_compare, truth_table_compare
from utils.corpus import compute_stats, export_graph, load_corpus, loaded_definitions
from utils.diagnostics import Diagnostic, has_errors
from utils.errors import ComparisonError, CorpusError, DatasetError
from utils.evaluator import StreamError, classify_stream, read_records
from utils.model import Definition
from utils.renderer import RenderOptions, render
from utils.validator import load_definition, rule_registry

logger = logging.getLogger("osd")

EXIT_SUCCESS = EXIT_CODES["success"]
EXIT_FINDINGS = EXIT_CODES["findings"]
EXIT_USAGE = EXIT_CODES["usage"]
EXIT_IO = EXIT_CODES["io"]

ANSI = {"error": "\033[31m", "warning": "\033[33m", "reset": "\033[0m"}


def use_color(stream: IO) -> bool:
    if os.environ.get("OSD_NO_COLOR"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def style(text: str, color: str, stream: IO) -> str:
    return f"{ANSI[color]}{text}{ANSI['reset']}" if use_color(stream) else text


def format_diagnostic(diagnostic: Diagnostic, source: str, stream: IO) -> str:
    severity = style(diagnostic.severity.value, diagnostic.severity.value, stream)
    return f"{source}: {severity} {diagnostic.rule_id} {diagnostic.path}: {diagnostic.message}"


def report_diagnostics(diagnostics: Iterable[Diagnostic], source: str, stream: IO = None):
    stream = stream or sys.stderr
    for diagnostic in diagnostics:
        print(format_diagnostic(diagnostic, source, stream), file=stream)


def read_definition(path: str) -> Tuple[Optional[Definition], int]:
    """Lit et valide une définition ; (Definition, 0) ou (None, code de sortie)"""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        print(f"{path}: lecture impossible : {e.strerror or e}", file=sys.stderr)
        return None, EXIT_IO
    definition, diagnostics = load_definition(data)
    report_diagnostics(diagnostics, path)
    if definition is None or has_errors(diagnostics):
        return None, EXIT_FINDINGS
    return definition, EXIT_SUCCESS


def open_records(path: str) -> ContextManager[IO[str]]:
    if path == "-":
        return contextlib.nullcontext(sys.stdin)
    return Path(path).open(encoding="utf-8", newline="\n")


# ============================================================================
# SOUS-COMMANDES
# ============================================================================

def _expand_paths(paths: List[str]) -> List[Path]:
    expanded = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            expanded.extend(sorted(p for p in path.rglob("*.json") if p.is_file()))
        else:
            expanded.append(path)
    return expanded


def cmd_validate(args) -> int:
    io_error = False
    findings = False
    for path in _expand_paths(args.paths):
        try:
            data = path.read_bytes()
        except OSError as e:
            print(f"{path}: lecture impossible : {e.strerror or e}", file=sys.stderr)
            io_error = True
            continue
        _, diagnostics = load_definition(data)
        findings = findings or has_errors(diagnostics)
        for diagnostic in diagnostics:
            if args.format == "json":
                print(json.dumps({"file": str(path), **diagnostic.to_dict()}, ensure_ascii=False))
            else:
                print(format_diagnostic(diagnostic, str(path), sys.stdout))

    if io_error:
        return EXIT_IO
    return EXIT_FINDINGS if findings else EXIT_SUCCESS


def cmd_evaluate(args) -> int:
    definition, status = read_definition(args.definition)
    if definition is None:
        return status

    try:
        source = open_records(args.records)
    except OSError as e:
        print(f"{args.records}: lecture impossible : {e.strerror or e}", file=sys.stderr)
        return EXIT_IO

    stream_errors = 0
    with source as lines:
        for result in classify_stream(definition, read_records(lines), workers=args.workers):
            if isinstance(result, StreamError):
                stream_errors += 1
                print(f"{args.records}: ligne {result.line} : {result.message}", file=sys.stderr)
                if args.format == "json":
                    print(json.dumps(result.to_dict(), ensure_ascii=False))
                continue
            if args.format == "json":
                print(result.to_json(trace=args.trace))
                continue
            exclusion = result.exclusion.value if result.exclusion is not None else "-"
            print(f"{result.record_id}\t{result.outcome.value}\tinclusion={result.inclusion.value}\texclusion={exclusion}")
            if args.trace:
                _print_trace(result.inclusion_trace, 1)
                if result.exclusion_trace is not None:
                    _print_trace(result.exclusion_trace, 1)

    return EXIT_FINDINGS if stream_errors else EXIT_SUCCESS


def _print_trace(node, level: int):
    print(f"{'  ' * level}[{node.truth.value}] {node.label} ({node.evidence})")
    for child in node.children:
        _print_trace(child, level + 1)


def cmd_render(args) -> int:
    definition, status = read_definition(args.path)
    if definition is None:
        return status
    try:
        opts = RenderOptions.for_language(args.language, include_metadata=not args.no_metadata, indent_width=args.indent)
    except ValueError as e:
        print(f"osd render: {e}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(render(definition, opts))
    return EXIT_SUCCESS


def _load_corpus_definitions(root: str) -> Optional[List[Definition]]:
    try:
        entries = load_corpus(root)
    except CorpusError as e:
        print(f"osd: {e}", file=sys.stderr)
        return None
    for entry in entries:
        if entry.diagnostics:
            report_diagnostics(entry.diagnostics, str(entry.path))
    return loaded_definitions(entries)


def cmd_stats(args) -> int:
    definitions = _load_corpus_definitions(args.corpus)
    if definitions is None:
        return EXIT_IO
    stats = compute_stats(definitions)
    if args.format == "json":
        print(json.dumps(stats.to_dict(), indent=2, ensure_ascii=False))
    else:
        sys.stdout.write(stats.to_text())
    return EXIT_SUCCESS


def cmd_export_graph(args) -> int:
    definitions = _load_corpus_definitions(args.corpus)
    if definitions is None:
        return EXIT_IO
    document = json.dumps(export_graph(definitions), indent=2, ensure_ascii=False) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(document)
        return EXIT_SUCCESS
    try:
        Path(args.output).write_text(document, encoding="utf-8")
    except OSError as e:
        print(f"{args.output}: écriture impossible : {e.strerror or e}", file=sys.stderr)
        return EXIT_IO
    logger.info(f"✅ Graphe exporté : {args.output}")
    return EXIT_SUCCESS


def cmd_compare(args) -> int:
    a, status = read_definition(args.a)
    if a is None:
        return status
    b, status = read_definition(args.b)
    if b is None:
        return status

    try:
        aliases = load_aliases(Path(args.aliases).read_bytes()) if args.aliases else None
    except OSError as e:
        print(f"{args.aliases}: lecture impossible : {e.strerror or e}", file=sys.stderr)
        return EXIT_IO
    except ComparisonError as e:
        print(f"osd compare: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.mode == "truth-table":
            report = truth_table_compare(a, b, aliases=aliases)
        else:
            try:
                source = open_records(args.records)
            except OSError as e:
                print(f"{args.records}: lecture impossible : {e.strerror or e}", file=sys.stderr)
                return EXIT_IO
            with source as lines:
                report = record_compare(a, b, read_records(lines), aliases=aliases, workers=args.workers)
    except ComparisonError as e:
        print(f"osd compare: {e}", file=sys.stderr)
        report_diagnostics(e.diagnostics, "compare")
        return EXIT_FINDINGS

    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2, ensure_ascii=False))
    else:
        sys.stdout.write(report.to_text())
    return EXIT_SUCCESS


def cmd_fetch_dataset(args) -> int:
    downloader = DatasetDownloader(url=args.url) if args.url else DatasetDownloader()
    try:
        checkout = downloader.fetch(args.dest)
    except DatasetError as e:
        print(f"osd fetch-dataset: {e}", file=sys.stderr)
        return EXIT_IO
    print(checkout)
    return EXIT_SUCCESS


def cmd_rules(args) -> int:
    for rule in rule_registry():
        if args.format == "json":
            print(json.dumps({
                "rule_id": rule.rule_id,
                "severity": rule.severity.value,
                "stage": rule.stage,
                "description": rule.description,
            }, ensure_ascii=False))
        else:
            print(f"{rule.rule_id:<34} {rule.severity.value:<8} {rule.description}")
    return EXIT_SUCCESS


# ============================================================================
# ANALYSE DES ARGUMENTS
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osd",
        description="Boîte à outils Open Syndrome Definition : validation, évaluation, rendu, corpus, comparaison.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_format(p: argparse.ArgumentParser, default: str = "text"):
        p.add_argument("--format", choices=["json", "text"], default=default)

    p = sub.add_parser("validate", help="valider des documents OSD",
                       epilog="Liste des règles : osd rules")
    p.add_argument("paths", nargs="+", help="fichiers JSON ou répertoires")
    with_format(p)
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("evaluate", help="classer des enregistrements NDJSON")
    p.add_argument("--definition", required=True)
    p.add_argument("--records", default="-", help="fichier NDJSON (- : entrée standard)")
    p.add_argument("--trace", action="store_true", help="inclure l'explication complète")
    p.add_argument("--workers", type=int, default=WORKERS)
    with_format(p, "json")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("render", help="rendre une définition en texte")
    p.add_argument("path")
    p.add_argument("--no-metadata", action="store_true")
    p.add_argument("--indent", type=int, default=2, choices=range(1, 9), metavar="{1..8}")
    p.add_argument("--language", default="en", help="en, fr, pt ou es")
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser("stats", help="statistiques d'un corpus")
    p.add_argument("corpus")
    with_format(p, "json")
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("export-graph", help="graphe nœuds/liens d'un corpus")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_export_graph)

    p = sub.add_parser("compare", help="comparer deux définitions")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--mode", choices=["truth-table", "records"], default="truth-table")
    p.add_argument("--records", default="-")
    p.add_argument("--aliases", default=None, help="table JSON nom → nom canonique")
    p.add_argument("--workers", type=int, default=WORKERS)
    with_format(p, "json")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("fetch-dataset", help="télécharger le jeu de données publié")
    p.add_argument("dest")
    p.add_argument("--url", default=None)
    p.set_defaults(handler=cmd_fetch_dataset)

    p = sub.add_parser("rules", help="registre des règles de validation")
    with_format(p)
    p.set_defaults(handler=cmd_rules)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=LOG_LEVEL)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_SUCCESS
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
