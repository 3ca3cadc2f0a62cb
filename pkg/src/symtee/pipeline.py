"""End-to-end scan: parse, slice, build a harness, execute it, report."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .cparse import parse_unit
from .cparse.parser import DuplicateDefinition, NotFound, ParseError, find_function
from .harness.llmgen import GenError, generate_via_llm
from .harness.lower import LoweringError, lift_source_to_hir
from .harness.model import HarnessConfig, HarnessModel, build_model
from .harness.render import render_source
from .llm import FixtureMiss, LlmClient, TransportError, UsageRecord
from .report import Finding, assemble_finding, sort_findings
from .slicer import DEFAULT_SINKS, SinkCandidate, Slice, analyze_candidates
from .symexec.engine import DiscrepancyError, ExecConfig, PathBudgetExceeded, find_violations
from .symexec.external import EngineConfig, external_engine_run
from .symexec.solver import UnsupportedConstraint
from .symexec.types import Violation

GENERATORS = ("template", "llm")
ENGINES = ("builtin", "external", "both")
SOURCE_SUFFIXES = (".c",)


class PipelineError(Exception):
    pass


@dataclass
class PipelineConfig:
    sinks: tuple = DEFAULT_SINKS
    generator: str = "template"
    engine: str = "builtin"
    domain_bound: int = 4096
    default_capacity: int = 512
    path_budget: int = 4096
    max_retries: int = 3
    llm_client: Optional[LlmClient] = None
    engine_cfg: Optional[EngineConfig] = None
    jobs: int = 1

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"generator must be one of {GENERATORS}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        if self.generator == "llm" and self.llm_client is None:
            raise ValueError("the llm generator needs an LLM transport")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def harness_config(self) -> HarnessConfig:
        return HarnessConfig(self.domain_bound, self.default_capacity, max_retries=self.max_retries)

    def exec_config(self) -> ExecConfig:
        return ExecConfig(path_budget=self.path_budget)


@dataclass
class CandidateResult:
    candidate: SinkCandidate
    slice: Optional[Slice] = None
    dropped: Optional[str] = None
    finding: Optional[Finding] = None
    violations: list[Violation] = field(default_factory=list)
    generator: Optional[str] = None
    harness_source: Optional[bytes] = None
    usage: list[UsageRecord] = field(default_factory=list)
    error: Optional[str] = None
    notes: list[str] = field(default_factory=list)

    @property
    def stage(self) -> str:
        if self.error:
            return "error"
        if self.dropped:
            return "slicer"
        return "confirmed" if self.finding else "engine-clean"


@dataclass
class FileResult:
    file: str
    candidates: list[CandidateResult] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def findings(self) -> list[Finding]:
        return [c.finding for c in self.candidates if c.finding is not None]

    @property
    def errors(self) -> list[str]:
        out = [f"{self.file}: {self.error}"] if self.error else []
        return out + [f"{self.file}:{c.candidate.line}: {c.error}" for c in self.candidates if c.error]

    @property
    def usage(self) -> list[UsageRecord]:
        return [u for c in self.candidates for u in c.usage]


@dataclass
class ScanResult:
    files: list[FileResult]

    @property
    def findings(self) -> list[Finding]:
        return sort_findings([f for r in self.files for f in r.findings])

    @property
    def errors(self) -> list[str]:
        return [e for r in self.files for e in r.errors]

    @property
    def usage(self) -> list[UsageRecord]:
        return [u for r in self.files for u in r.usage]


def harness_line_map(harness_source: bytes, slice_: Slice) -> Callable[[int], Optional[int]]:
    """Map harness lines inside the sliced function back to original source lines."""
    try:
        func = find_function(parse_unit(harness_source, "<harness>"), slice_.function_name)
    except (ParseError, NotFound, DuplicateDefinition):
        return lambda line: None
    first, last = func.span.start_line, func.span.end_line

    def to_source(line: int) -> Optional[int]:
        return slice_.start_line + (line - first) if first <= line <= last else None

    return to_source


def _generate(result: CandidateResult, model: HarnessModel, cfg: PipelineConfig):
    """Produce (harness source, IR) for one slice and record how it was made."""
    hcfg = cfg.harness_config()
    if cfg.generator == "llm":
        try:
            gen = generate_via_llm(result.slice, cfg.llm_client, hcfg, model)
        except GenError as e:
            result.usage.append(e.usage)
            result.notes.append(f"LLM generation failed ({e}); used the template harness")
            result.generator = "llm_fallback_template"
        else:
            result.usage.append(gen.usage)
            result.generator = "llm"
            return gen.source, lift_source_to_hir(gen.source, hcfg, f"{result.slice.file_id}#llm-harness")
    else:
        result.generator = "template"
    source = render_source(model)
    return source, lift_source_to_hir(source, hcfg, f"{result.slice.file_id}#harness")


def _minimal(violations: list[Violation]) -> Violation:
    return min(violations, key=lambda v: (v.assert_site if v.engine != "external" else 0,
                                          tuple(v.witness.assignment.values())))


def _execute(result: CandidateResult, source: bytes, ir, cfg: PipelineConfig) -> list[Violation]:
    builtin: Optional[list[Violation]] = None
    if cfg.engine in ("builtin", "both"):
        builtin = find_violations(ir, cfg.exec_config())
    if cfg.engine == "builtin":
        return builtin
    outcome = external_engine_run(source, cfg.engine_cfg or EngineConfig.from_env(), ir.symbol_names())
    if outcome.status == "unavailable":
        result.notes.append(f"external engine unavailable ({outcome.log}); builtin verdict used")
        return builtin if builtin is not None else find_violations(ir, cfg.exec_config())
    if outcome.status == "failure":
        raise PipelineError(f"external engine failed: {outcome.log.strip()[:500]}")
    if builtin is not None and bool(builtin) != bool(outcome.violations):
        raise DiscrepancyError(
            f"builtin engine reports {len(builtin)} violation(s), external engine {len(outcome.violations)}")
    return outcome.violations


def analyze_slice(result: CandidateResult, cfg: PipelineConfig) -> CandidateResult:
    try:
        model = build_model(result.slice, cfg.harness_config())
        source, ir = _generate(result, model, cfg)
        result.harness_source = source
        result.violations = _execute(result, source, ir, cfg)
    except (LoweringError, ParseError, PathBudgetExceeded, UnsupportedConstraint, DiscrepancyError,
            PipelineError, TransportError, FixtureMiss) as e:
        result.error = f"{type(e).__name__}: {e}"
        return result
    if result.violations:
        v = _minimal(result.violations)
        result.finding = assemble_finding(result.candidate, result.slice, v, model, result.generator,
                                          harness_line_map(source, result.slice))
    return result


def scan_source(source: bytes | str, file_id: str, cfg: Optional[PipelineConfig] = None) -> FileResult:
    cfg = cfg or PipelineConfig()
    out = FileResult(file_id)
    try:
        unit = parse_unit(source, file_id)
    except ParseError as e:
        out.error = f"ParseError: {e}"
        return out
    for outcome in analyze_candidates(unit, cfg.sinks):
        res = CandidateResult(outcome.candidate, outcome.slice, outcome.dropped)
        if outcome.slice is not None:
            analyze_slice(res, cfg)
        out.candidates.append(res)
    return out


def collect_sources(paths: list[str | Path]) -> list[Path]:
    """C files named directly or found under directories, sorted; missing paths raise."""
    files: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files += sorted(f for f in p.rglob("*") if f.is_file() and f.suffix in SOURCE_SUFFIXES)
        elif p.is_file():
            files.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    seen, unique = set(), []
    for f in files:
        if f.resolve() not in seen:
            seen.add(f.resolve())
            unique.append(f)
    return unique


def scan_paths(paths: list[str | Path], cfg: Optional[PipelineConfig] = None,
               file_id: Callable[[Path], str] = lambda p: p.as_posix()) -> ScanResult:
    cfg = cfg or PipelineConfig()
    files = collect_sources(paths)

    def one(path: Path) -> FileResult:
        try:
            data = path.read_bytes()
        except OSError as e:
            return FileResult(file_id(path), error=f"cannot read: {e}")
        return scan_source(data, file_id(path), cfg)

    if cfg.jobs == 1:
        return ScanResult([one(f) for f in files])
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return ScanResult(list(pool.map(one, files)))
