"""Command-line entry point: ``symtee scan|harness|exec|bench|report``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .bench import CorpusError, bundled_corpus_root, load_corpus, outcomes_json, run_bench, score
from .cparse import ParseError
from .harness.llmgen import GenError, generate_via_llm
from .harness.lower import LoweringError, lift_source_to_hir
from .harness.model import HarnessConfig, build_model
from .harness.render import render_source
from .llm import FixtureMiss, TransportError, client_from_env
from .pipeline import PipelineConfig, scan_paths
from .report import EXIT_CLEAN, EXIT_ERROR, EXIT_FINDINGS, exit_code, load_report, render_report
from .slicer import DEFAULT_SINKS, load_sink_specs, slice_source
from .symexec.engine import DiscrepancyError, ExecConfig, PathBudgetExceeded, find_violations
from .symexec.external import EngineConfig, external_engine_run
from .symexec.solver import UnsupportedConstraint

EPILOG = """\
common flags: --sinks <file>, --generator template|llm, --engine builtin|external|both,
  --domain-bound <n>, --default-capacity <n>, --format json|text, --jobs <n>, --out <file>
environment: SYMTEE_ENGINE_PATH, SYMTEE_ENGINE_CC, SYMTEE_ENGINE_TIMEOUT_SECS,
  SYMTEE_LLM_API_KEY, SYMTEE_LLM_ENDPOINT, SYMTEE_LLM_MODEL
exit codes: 0 clean, 1 findings (or bench thresholds missed), 2 operational error"""


class UsageFailure(Exception):
    pass


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _common(p: argparse.ArgumentParser, *, generator=True, engine=True, jobs=True) -> None:
    p.add_argument("--sinks", metavar="FILE", help="JSON sink specification (default: TEE_MemMove, memcpy, memmove)")
    if generator:
        p.add_argument("--generator", choices=("template", "llm"), default="template",
                       help="harness generator (default: template)")
        p.add_argument("--llm-fixtures", metavar="FILE", nargs="+", help="replay LLM responses from fixture files")
        p.add_argument("--llm-record", metavar="FILE", help="record live LLM exchanges into this fixture file")
    if engine:
        p.add_argument("--engine", choices=("builtin", "external", "both"), default="builtin",
                       help="symbolic execution engine (default: builtin)")
        p.add_argument("--path-budget", type=_positive, default=4096, metavar="N",
                       help="maximum explored paths per harness (default: 4096)")
    p.add_argument("--domain-bound", type=_nonneg, default=4096, metavar="N",
                   help="upper bound assumed for symbolic lengths (default: 4096)")
    p.add_argument("--default-capacity", type=_positive, default=512, metavar="N",
                   help="capacity assumed for destinations of unknown size (default: 512)")
    p.add_argument("--format", choices=("json", "text"), default="text", help="output format (default: text)")
    if jobs:
        p.add_argument("--jobs", type=_positive, default=1, metavar="N", help="parallel workers (default: 1)")
    p.add_argument("--out", metavar="FILE", help="write the output here instead of standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symtee", description="Find unvalidated memory copies in trusted-application C code.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("scan", help="scan C files or directories and report confirmed findings",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("paths", nargs="+", metavar="PATH")
    _common(p)

    p = sub.add_parser("harness", help="print the harness (C source or IR) built for each slice of one file")
    p.add_argument("path", metavar="FILE")
    p.add_argument("--function", help="only slices in this function")
    p.add_argument("--line", type=int, help="only the sink on this line")
    p.add_argument("--emit", choices=("source", "ir"), default="source")
    _common(p, engine=False, jobs=False)

    p = sub.add_parser("exec", help="run one harness file through an engine")
    p.add_argument("path", metavar="HARNESS")
    _common(p, generator=False, jobs=False)

    p = sub.add_parser("bench", help="score the pipeline on a labeled corpus")
    p.add_argument("corpus", nargs="?", metavar="CORPUS_ROOT", help="corpus root (default: bundled corpus)")
    p.add_argument("--min-precision", type=Fraction, default=Fraction(100), metavar="PCT")
    p.add_argument("--min-recall", type=Fraction, default=Fraction(92), metavar="PCT")
    p.add_argument("--price-per-token", type=Fraction, default=Fraction(0), metavar="USD")
    p.add_argument("--json-out", metavar="FILE", help="also write the JSON score here")
    _common(p)

    p = sub.add_parser("report", help="re-render a saved JSON report")
    p.add_argument("path", metavar="REPORT")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--out", metavar="FILE")
    return parser


def _emit(data: bytes, out: Optional[str]) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _sinks(args):
    return load_sink_specs(args.sinks) if args.sinks else DEFAULT_SINKS


def _client(args):
    if getattr(args, "generator", "template") != "llm":
        return None
    return client_from_env(replay=args.llm_fixtures, record=args.llm_record)


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        sinks=_sinks(args), generator=args.generator, engine=args.engine,
        domain_bound=args.domain_bound, default_capacity=args.default_capacity,
        path_budget=args.path_budget, llm_client=_client(args), jobs=args.jobs,
    )


def cmd_scan(args) -> int:
    result = scan_paths(args.paths, _pipeline_config(args))
    for f in result.files:
        for c in f.candidates:
            for note in c.notes:
                print(f"note: {f.file}:{c.candidate.line}: {note}", file=sys.stderr)
    for e in result.errors:
        print(f"error: {e}", file=sys.stderr)
    _emit(render_report(result.findings, args.format), args.out)
    return exit_code(result.findings, len(result.errors))


def cmd_harness(args) -> int:
    hcfg = HarnessConfig(args.domain_bound, args.default_capacity)
    data = Path(args.path).read_bytes()
    client = _client(args)
    chunks = []
    for o in slice_source(data, Path(args.path).as_posix(), _sinks(args)):
        c = o.candidate
        if (args.function and c.function_name != args.function) or (args.line and c.line != args.line):
            continue
        header = f"{c.file_id}:{c.line} {c.spec.api_name} in {c.function_name}"
        if o.slice is None:
            chunks.append(f"/* {header}: no harness ({o.dropped}) */\n")
            continue
        model = build_model(o.slice, hcfg)
        if client is not None:
            source = generate_via_llm(o.slice, client, hcfg, model).source
        else:
            source = render_source(model)
        if args.emit == "ir":
            chunks.append(f"# {header}\n{lift_source_to_hir(source, hcfg)}\n")
        else:
            chunks.append(f"/* {header} */\n{source.decode()}")
    if not chunks:
        print("error: no matching sink calls", file=sys.stderr)
        return EXIT_ERROR
    _emit("\n".join(chunks).encode(), args.out)
    return EXIT_CLEAN


def cmd_exec(args) -> int:
    source = Path(args.path).read_bytes()
    hcfg = HarnessConfig(args.domain_bound, args.default_capacity)
    ir = lift_source_to_hir(source, hcfg, Path(args.path).as_posix(), {s.api_name for s in _sinks(args)})
    lines = []
    violations = None
    if args.engine in ("builtin", "both"):
        violations = find_violations(ir, ExecConfig(path_budget=args.path_budget))
    if args.engine in ("external", "both"):
        outcome = external_engine_run(source, EngineConfig.from_env(), ir.symbol_names())
        if outcome.status == "failure":
            print(f"error: external engine failed:\n{outcome.log}", file=sys.stderr)
            return EXIT_ERROR
        if outcome.status == "unavailable":
            print(f"note: {outcome.log}; using the builtin engine", file=sys.stderr)
            if violations is None:
                violations = find_violations(ir, ExecConfig(path_budget=args.path_budget))
        elif violations is not None and bool(violations) != bool(outcome.violations):
            raise DiscrepancyError(f"builtin: {len(violations)} violation(s), external: {len(outcome.violations)}")
        else:
            violations = outcome.violations
    rows = [{"assert_site": v.assert_site, "engine": v.engine, "witness": v.witness.inputs(),
             "message": v.message} for v in violations]
    if args.format == "json":
        data = json.dumps({"violations": rows}, separators=(",", ":")) + "\n"
    else:
        for r in rows:
            w = ", ".join(f"{k}={v}" for k, v in r["witness"].items()) or "(no inputs)"
            lines.append(f"assert #{r['assert_site']} violated ({r['engine']}): {w}")
        data = "\n".join(lines or ["no violations"]) + "\n"
    _emit(data.encode(), args.out)
    return EXIT_FINDINGS if violations else EXIT_CLEAN


def cmd_bench(args) -> int:
    cases = load_corpus(args.corpus or bundled_corpus_root())
    outcomes = run_bench(cases, _pipeline_config(args))
    s = score(outcomes, args.price_per_token)
    doc = s.to_dict() | {"cases": outcomes_json(outcomes)}
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(doc, indent=2) + "\n")
    data = (json.dumps(doc, indent=2) + "\n") if args.format == "json" else s.render_text()
    _emit(data.encode(), args.out)
    if s.errors:
        return EXIT_ERROR
    return EXIT_CLEAN if s.meets(args.min_precision, args.min_recall) else EXIT_FINDINGS


def cmd_report(args) -> int:
    findings = load_report(Path(args.path).read_bytes())
    _emit(render_report(findings, args.format), args.out)
    return exit_code(findings)


COMMANDS = {"scan": cmd_scan, "harness": cmd_harness, "exec": cmd_exec, "bench": cmd_bench, "report": cmd_report}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code not in (0, None) else EXIT_CLEAN
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, CorpusError, ParseError, LoweringError, PathBudgetExceeded,
            UnsupportedConstraint, DiscrepancyError, TransportError, FixtureMiss, GenError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
