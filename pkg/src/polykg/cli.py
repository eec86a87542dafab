"""Command-line entry point: ``polykg load|query|explain|verify|bench``.

Exit codes: 0 success, 1 input, parse or evaluation error, 2 verification
mismatch, 3 backend failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .bench import parse_query_file, run_bench
from .dispatch import Dispatcher, reference_dispatcher
from .errors import (
    AllBackendsFailed,
    EvalError,
    InsufficientBackends,
    PolyKGError,
    QuerySyntaxError,
    VerificationMismatch,
)
from .model import UNBOUND, Document, KnowledgeGraph, ResultSet
from .ntriples import IngestReport, dump_documents, load_ntriples
from .routing import RoutingPolicy, default_policy, load_policy

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_MISMATCH = 2
EXIT_BACKEND = 3

CONFIG_ENV = "POLYKG_CONFIG"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class Workspace:
    graph: KnowledgeGraph
    documents: list[Document]
    policy: RoutingPolicy
    report: IngestReport

    @classmethod
    def load(cls, path: Optional[str], policy: RoutingPolicy, strict: bool = True) -> "Workspace":
        if path is None:
            raise UsageError("this command needs --data FILE.nt")
        graph, docs, report = load_ntriples(Path(path).read_text(encoding="utf-8"), strict=strict)
        return cls(graph, docs, policy, report)

    def dispatcher(self) -> Dispatcher:
        return reference_dispatcher(self.graph, self.documents, self.policy)


def _policy(args: argparse.Namespace) -> RoutingPolicy:
    config = args.config or os.environ.get(CONFIG_ENV)
    return load_policy(Path(config)) if config else default_policy()


def _query_text(arg: str) -> str:
    if arg == "-":
        return sys.stdin.read()
    candidate = Path(arg)
    if "{" not in arg and candidate.is_file():
        return candidate.read_text(encoding="utf-8")
    return arg


def _cell(value) -> str:
    return "" if value is UNBOUND else value.lexical


def format_table(rs: ResultSet) -> str:
    header = list(rs.variables)
    body = [[_cell(row.get(v, UNBOUND)) for v in header] for row in rs.rows]
    widths = [max([len(h)] + [len(r[i]) for r in body]) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in body]
    lines.append(f"({len(body)} row{'s' if len(body) != 1 else ''})")
    return "\n".join(lines)


# -- subcommands -------------------------------------------------------------------


def cmd_load(args: argparse.Namespace, out: TextIO) -> int:
    ws = Workspace.load(args.data or args.file, _policy(args), strict=not args.lenient)
    print(ws.report.summary(), file=out)
    for err in ws.report.errors:
        print(f"skipped {err}", file=sys.stderr)
    if args.documents:
        with open(args.documents, "w", encoding="utf-8") as fp:
            dump_documents(ws.documents, fp)
    return EXIT_OK


def cmd_query(args: argparse.Namespace, out: TextIO) -> int:
    ws = Workspace.load(args.data, _policy(args), strict=not args.lenient)
    outcome = ws.dispatcher().execute(_query_text(args.query))
    if args.json:
        print(json.dumps(outcome.result.to_json(), indent=2, ensure_ascii=False), file=out)
    else:
        print(format_table(outcome.result), file=out)
        print(f"answered by {outcome.winner}", file=sys.stderr)
    return EXIT_OK


def cmd_explain(args: argparse.Namespace, out: TextIO) -> int:
    d = Dispatcher(_policy(args))
    plan = d.plan(_query_text(args.query))
    label, mods = plan.label, plan.ast.modifiers
    head = f"shape={label.shape.value}; {plan.decision.describe()}; translation:"
    if plan.translation is None:
        reason = f" ({plan.untranslatable})" if plan.untranslatable else ""
        print(f"{head} n/a{reason}", file=out)
    else:
        print(head, file=out)
    modifiers = [
        name for name, on in (
            ("ORDER BY", mods.order_by is not None),
            ("LIMIT", mods.limit is not None),
            ("OFFSET", mods.offset is not None),
        ) if on
    ]
    print(
        f"flags: modifiers={','.join(modifiers) or 'none'}; "
        f"optional={'yes' if label.has_optional else 'no'}; "
        f"filter={'yes' if label.has_filter else 'no'}",
        file=out,
    )
    if plan.translation is not None:
        print(plan.translation.to_text(), file=out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    ws = Workspace.load(args.data, _policy(args), strict=not args.lenient)
    try:
        _, report = ws.dispatcher().execute_verified(_query_text(args.query))
    except VerificationMismatch as exc:
        print(exc.report.describe(), file=out)
        return EXIT_MISMATCH
    print(report.describe(), file=out)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, out: TextIO) -> int:
    if args.repeat < 1:
        raise UsageError("--repeat must be at least 1")
    policy = _policy(args)
    ws = Workspace.load(args.data, policy, strict=not args.lenient)
    queries = parse_query_file(Path(args.queries).read_text(encoding="utf-8"))

    def build() -> Dispatcher:
        # a fresh workspace per call keeps --cold honest: nothing is shared
        if args.cold:
            graph, docs, _ = load_ntriples(Path(args.data).read_text(encoding="utf-8"), strict=not args.lenient)
            return reference_dispatcher(graph, docs, policy)
        return ws.dispatcher()

    rows = run_bench(build, queries, repeat=args.repeat, cold=args.cold, parallel=args.parallel)
    for row in rows:
        print(row.format(), file=out)
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", metavar="FILE.nt", help="N-Triples file to load")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="lenient", action="store_false", help="fail on malformed lines (default)")
    mode.add_argument("--lenient", dest="lenient", action="store_true", help="skip malformed lines")
    common.add_argument("--config", metavar="POLICY.json", help=f"routing policy file (or ${CONFIG_ENV})")
    common.set_defaults(lenient=False)

    parser = _Parser(prog="polykg", description="Route knowledge-graph queries across backends.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("load", parents=[common], help="load a graph and report ingest statistics")
    p.add_argument("file", nargs="?", help="N-Triples file (alternative to --data)")
    p.add_argument("--documents", metavar="OUT.ndjson", help="also write the document collection")
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("query", parents=[common], help="run a query")
    p.add_argument("query", help="query text, a file holding it, or - for stdin")
    p.add_argument("--json", action="store_true", help="print the JSON results document")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("explain", parents=[common], help="show label, route and translation")
    p.add_argument("query")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("verify", parents=[common], help="run on every capable backend and compare")
    p.add_argument("query")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="time backends on a query file")
    p.add_argument("queries", help="file of queries separated by lines holding only ';'")
    p.add_argument("--repeat", type=int, default=3, metavar="N")
    p.add_argument("--cold", action="store_true", help="rebuild engines before every repetition")
    p.add_argument("--parallel", action="store_true", help="run repetitions concurrently")
    p.set_defaults(func=cmd_bench)
    return parser


def _all_eval_errors(exc: AllBackendsFailed) -> bool:
    return bool(exc.failures) and all(isinstance(e, EvalError) for e in exc.failures.values())


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"polykg: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QuerySyntaxError as exc:
        print(f"polykg: query error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AllBackendsFailed as exc:
        print(f"polykg: {exc}", file=sys.stderr)
        return EXIT_INPUT if _all_eval_errors(exc) else EXIT_BACKEND
    except InsufficientBackends as exc:
        print(f"polykg: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (PolyKGError, OSError) as exc:
        print(f"polykg: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
