"""Findings and their JSON/text renderings."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from .cparse.printer import expr as print_expr
from .harness.model import DEFAULT_ERROR, HarnessModel, build_model
from .slicer import Slice, SinkCandidate
from .symexec.types import Violation

REPORT_VERSION = 1
TOOL_NAME = "symtee"

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


@dataclass(frozen=True)
class PathStep:
    span: str
    taken: bool


@dataclass
class Finding:
    id: str
    file: str
    function: str
    sink_line: int
    sink_api: str
    capacity_bytes: int
    length_expr: str
    witness: dict[str, int]
    oracle_kind: str
    engine: str
    generator: str
    suggested_guard: str
    path: list[PathStep] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["path"] = [{"span": p.span, "taken": p.taken} for p in self.path]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Finding":
        d = dict(d)
        d["path"] = [PathStep(p["span"], bool(p["taken"])) for p in d.get("path", [])]
        d["witness"] = {str(k): int(v) for k, v in d["witness"].items()}
        return cls(**d)


def finding_id(file: str, function: str, start_byte: int, end_byte: int) -> str:
    key = f"{file}\0{function}\0{start_byte}:{end_byte}".encode()
    return hashlib.sha256(key).hexdigest()[:16]


def guard_exit(cand: SinkCandidate, model: HarnessModel) -> str:
    """The early exit used by the suggested guard, in the function's own idiom."""
    func = cand.function
    if model.returns_status:
        return f"return {model.oracle.expected_error or DEFAULT_ERROR};"
    if func.ret_pointers:
        return "return 0;"
    if func.ret.names == ("void",):
        return "return;"
    return "return -1;"


def suggested_guard(cand: SinkCandidate, model: HarnessModel) -> str:
    return f"if ({print_expr(cand.len_expr)} > {model.capacity_bytes}) {guard_exit(cand, model)}"


def assemble_finding(cand: SinkCandidate, slice_: Slice, violation: Violation,
                     model: Optional[HarnessModel] = None, generator: str = "template",
                     line_map: Optional[Callable[[int], Optional[int]]] = None) -> Finding:
    model = model or build_model(slice_)
    if violation.engine == "external" and violation.artifact:
        path = [PathStep(f"artifact:{violation.artifact}.ktest", True)]
    else:
        path = []
        for d in violation.decisions:
            if d.origin is None:
                continue
            line = line_map(d.origin.line) if line_map else d.origin.line
            if line is not None:
                path.append(PathStep(f"{cand.file_id}:{line}", d.taken))
    return Finding(
        id=finding_id(cand.file_id, cand.function_name, cand.call_span.start_byte, cand.call_span.end_byte),
        file=cand.file_id,
        function=cand.function_name,
        sink_line=cand.line,
        sink_api=cand.spec.api_name,
        capacity_bytes=model.capacity_bytes,
        length_expr=print_expr(cand.len_expr),
        witness=violation.witness.inputs(),
        oracle_kind=model.oracle.kind,
        engine=violation.engine,
        generator=generator,
        suggested_guard=suggested_guard(cand, model),
        path=path,
    )


def sort_findings(findings: list[Finding]) -> list[Finding]:
    return sorted(findings, key=lambda f: (f.file, f.sink_line, f.id))


def render_report(findings: list[Finding], fmt: str = "json") -> bytes:
    ordered = sort_findings(findings)
    if fmt == "json":
        doc = {"version": REPORT_VERSION, "tool": TOOL_NAME, "findings": [f.to_dict() for f in ordered]}
        return (json.dumps(doc, separators=(",", ":"), ensure_ascii=False) + "\n").encode()
    if fmt == "text":
        return _text(ordered).encode()
    raise ValueError(f"unknown report format {fmt!r}")


def _text(findings: list[Finding]) -> str:
    if not findings:
        return "No findings.\n"
    blocks = []
    for f in findings:
        witness = ", ".join(f"{k}={v}" for k, v in f.witness.items()) or "(none)"
        path = ", ".join(f"{p.span} {'taken' if p.taken else 'not taken'}" for p in f.path) or "(straight line)"
        blocks.append("\n".join([
            f"{f.file}:{f.sink_line}: {f.sink_api} in {f.function} copies `{f.length_expr}` bytes "
            f"into a {f.capacity_bytes}-byte destination without validation",
            f"  witness:         {witness}",
            f"  path:            {path}",
            f"  oracle:          {f.oracle_kind} ({f.engine} engine, {f.generator} harness)",
            f"  suggested guard: {f.suggested_guard}",
            f"  id:              {f.id}",
        ]))
    summary = f"{len(findings)} finding{'s' if len(findings) != 1 else ''}."
    return "\n\n".join(blocks) + "\n\n" + summary + "\n"


def load_report(data: bytes | str) -> list[Finding]:
    doc = json.loads(data)
    if not isinstance(doc, dict) or doc.get("version") != REPORT_VERSION or not isinstance(doc.get("findings"), list):
        raise ValueError("not a version 1 report")
    return [Finding.from_dict(f) for f in doc["findings"]]


def exit_code(findings: list[Finding], errors: int = 0) -> int:
    if errors:
        return EXIT_ERROR
    return EXIT_FINDINGS if findings else EXIT_CLEAN
