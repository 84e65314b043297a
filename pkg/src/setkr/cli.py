"""Command-line entry point: ``setkr <command> ...``.

Exit status is 0 on success (or a query that holds), 1 when the answer is
negative or the input has diagnostics, and 2 on usage or I/O errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .definitions import DEFAULT_MAX_ROUNDS, build_dependency_graph, check_nonrecursive, evaluate
from .desugar import desugar_kb
from .dl import parse_dl
from .errors import ParseError, SetKRError, SizeLimitExceeded
from .parser import format_assertion, format_definition, format_kb, parse_assertion, parse_kb
from .semantics import (CounterModel, Holds, SearchBound, check_entails, find_violation,
                        interpretation_from_kb, query_database)
from .syntax import Assertion, Diagnostic, SourceSpan, to_json, validate_structure

JSON_DEFAULT = {"eval", "check", "entail", "query"}


class _InputError(Exception):
    pass


def _read(path):
    if path == "-":
        return sys.stdin.read(), "<stdin>"
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read(), path
    except OSError as e:
        raise _InputError(f"{path}: {e.strerror or e}") from e
    except UnicodeDecodeError as e:
        raise _InputError(f"{path}: not UTF-8 text ({e.reason})") from e


def _diag_json(d: Diagnostic):
    return {"severity": d.severity, "message": d.message, "file": d.span.file,
            "line": d.span.line, "column": d.span.column}


class _Run:
    def __init__(self, args, out, err):
        self.args = args
        self.out = out
        self.err = err
        self.fmt = args.format or ("json" if args.command in JSON_DEFAULT else "text")

    def emit(self, payload, text):
        if self.fmt == "json":
            payload = {"command": self.args.command, **payload}
            self.out.write(json.dumps(payload, ensure_ascii=False, indent=2) + "\n")
        else:
            self.out.write(text if text.endswith("\n") else text + "\n")

    def report(self, diagnostics):
        for d in diagnostics:
            self.err.write(str(d) + "\n")
        if self.fmt == "json":
            self.emit({"ok": False, "diagnostics": [_diag_json(d) for d in diagnostics]}, "")
        return 1

    def input_name(self):
        a = self.args
        path = getattr(a, "file", None) or getattr(a, "kb", None) or getattr(a, "db", None) or "-"
        return "<stdin>" if path == "-" else path

    def load_kb(self, path):
        text, name = _read(path)
        return parse_kb(text, name)

    # commands ------------------------------------------------------------

    def parse(self):
        kb = self.load_kb(self.args.file)
        self.emit({"ok": True, "kb": to_json(kb)}, format_kb(kb))
        return 0

    def validate(self):
        kb = self.load_kb(self.args.file)
        diagnostics = validate_structure(kb)
        if not diagnostics:
            try:
                d = check_nonrecursive(build_dependency_graph(kb.definitions))
            except SetKRError as e:
                d = Diagnostic("error", str(e), SourceSpan(self.args.file))
            if d is not None:
                diagnostics.append(d)
        if diagnostics:
            return self.report(diagnostics)
        self.emit({"ok": True, "diagnostics": []}, "ok")
        return 0

    def eval(self):
        kb = self.load_kb(self.args.file)
        result = evaluate(kb.definitions, max_rounds=self.args.max_rounds,
                          concept_names=kb.structure.concepts)
        lines = [f"{k} = {v}" for k, v in sorted(result.individual_values.items())]
        lines += [f"{k} = {v}" for k, v in sorted(result.concept_extents.items())]
        lines.append(f"rounds_executed = {result.rounds_executed}")
        lines.append(f"fixpoint_reached = {str(result.fixpoint_reached).lower()}")
        self.emit({"ok": True, "result": result.to_json()}, "\n".join(lines))
        return 0

    def desugar(self):
        kb = desugar_kb(self.load_kb(self.args.file))
        text = format_kb(kb)
        self.emit({"ok": True, "kb": to_json(kb), "text": text}, text)
        return 0

    def check(self):
        model = interpretation_from_kb(self.load_kb(self.args.model))
        kb = self.load_kb(self.args.kb)
        violation = find_violation(model, kb)
        if violation is None:
            self.emit({"ok": True, "models": True, "violation": None}, "model")
            return 0
        shown = (format_assertion(violation, kb.structure) if isinstance(violation, Assertion)
                 else format_definition(violation, kb.structure))
        self.emit({"ok": False, "models": False, "violation": shown}, f"not a model: {shown}")
        return 1

    def entail(self):
        kb = self.load_kb(self.args.kb)
        q = parse_assertion(self.args.query, kb.structure, "<query>")
        bound = SearchBound(atoms=self.args.atoms, depth=self.args.depth,
                            node_limit=self.args.node_limit)
        verdict = check_entails(kb, q, bound)
        payload = {"ok": isinstance(verdict, Holds), "query": self.args.query,
                   "bound": {"atoms": bound.atoms, "depth": bound.depth, "node_limit": bound.node_limit},
                   **verdict.to_json()}
        text = verdict.verdict
        if isinstance(verdict, CounterModel):
            text += "\n" + json.dumps(verdict.interpretation.to_json(), ensure_ascii=False, indent=2)
        self.emit(payload, text)
        return 0 if isinstance(verdict, Holds) else 1

    def query(self):
        kb = self.load_kb(self.args.db)
        q = parse_assertion(self.args.query, kb.structure, "<query>")
        result = query_database(kb, q)
        self.emit({"ok": result, "query": self.args.query, "result": result}, str(result).lower())
        return 0 if result else 1

    def dl2skr(self):
        text, name = _read(self.args.file)
        kb = parse_dl(text, name).to_kb()
        skr = format_kb(kb)
        self.emit({"ok": True, "kb": to_json(kb), "text": skr}, skr)
        return 0


def build_parser():
    p = argparse.ArgumentParser(prog="setkr", description="Set-theoretic knowledge representation toolkit.")
    p.add_argument("--version", action="version", version=f"setkr {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, help_):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--format", choices=("text", "json"), default=None,
                       help="output format (default: json for eval/check/entail/query, text otherwise)")
        return c

    command("parse", "parse a .skr file and print it canonically").add_argument("file")
    command("validate", "report well-formedness and recursion diagnostics").add_argument("file")
    c = command("eval", "evaluate definitions to values, extents and tables")
    c.add_argument("file")
    c.add_argument("--max-rounds", type=_positive, default=DEFAULT_MAX_ROUNDS)
    command("desugar", "lower logic sugar and nested terms to primitive assertions").add_argument("file")
    c = command("check", "check whether a model satisfies a knowledge base")
    c.add_argument("model")
    c.add_argument("kb")
    c = command("entail", "bounded entailment of a query assertion")
    c.add_argument("kb")
    c.add_argument("-q", "--query", required=True)
    c.add_argument("--atoms", type=_positive, default=3)
    c.add_argument("--depth", type=_natural, default=1)
    c.add_argument("--node-limit", type=_positive, default=200_000)
    c = command("query", "answer a fact query against a database-fragment knowledge base")
    c.add_argument("db")
    c.add_argument("-q", "--query", required=True)
    command("dl2skr", "translate a DL ontology into .skr").add_argument("file")
    return p


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _natural(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    run = _Run(args, out, err)
    try:
        return getattr(run, args.command)()
    except _InputError as e:
        err.write(f"setkr: {e}\n")
        return 2
    except ParseError as e:
        return run.report(e.diagnostics)
    except SetKRError as e:
        msg = str(e) or type(e).__name__
        if isinstance(e, SizeLimitExceeded) and args.command == "eval":
            msg += "; a smaller --max-rounds may help"
        return run.report([Diagnostic("error", msg, SourceSpan(run.input_name()))])
    except RecursionError:
        return run.report([Diagnostic("error", "input nests too deeply", SourceSpan(run.input_name()))])


if __name__ == "__main__":
    sys.exit(main())
