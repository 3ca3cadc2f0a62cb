"""Labeled-corpus benchmark: precision and recall of the whole pipeline."""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from .cparse import ParseError, parse_unit
from .llm import EMPTY_MARK, UsageRecord, UsageReport, usage_summary
from .pipeline import FileResult, PipelineConfig, scan_source
from .report import Finding
from .slicer import find_sink_calls

LINE_TOLERANCE = 2


class CorpusError(Exception):
    pass


def bundled_corpus_root() -> Path:
    return Path(str(resources.files("symtee").joinpath("data", "corpus")))


@dataclass(frozen=True)
class SinkLabel:
    file: str
    function: str
    line: int
    api: str

    def matches(self, f: Finding) -> bool:
        return (Path(f.file).name == self.file and f.function == self.function and f.sink_api == self.api
                and abs(f.sink_line - self.line) <= LINE_TOLERANCE)


@dataclass
class CorpusCase:
    name: str  # "<group>/<case>"
    root: Path
    sources: dict[str, bytes]
    vulnerable_sinks: list[SinkLabel]
    safe_sinks: list[SinkLabel]
    expect_slicer_failure: bool = False

    @property
    def group(self) -> str:
        return self.name.split("/", 1)[0] if "/" in self.name else ""

    @property
    def control(self) -> bool:
        """A case with no labeled vulnerability (guards against false positives)."""
        return not self.vulnerable_sinks


def _labels(raw, case: str, key: str) -> list[SinkLabel]:
    out = []
    for i, e in enumerate(raw.get(key, [])):
        try:
            out.append(SinkLabel(str(e["file"]), str(e["function"]), int(e["line"]), str(e["api"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"{case}: {key}[{i}] is malformed ({exc})") from None
    return out


def _validate(case: CorpusCase) -> None:
    for label in case.vulnerable_sinks + case.safe_sinks:
        if label.file not in case.sources:
            raise CorpusError(f"{case.name}: label names unknown file {label.file}")
        src = case.sources[label.file]
        try:
            unit = parse_unit(src, label.file)
        except ParseError as e:
            raise CorpusError(f"{case.name}: {label.file} does not parse: {e}") from None
        direct = [c for c in find_sink_calls(unit) if c.line == label.line
                  and c.spec.api_name == label.api and c.function_name == label.function]
        if direct:
            continue
        if case.expect_slicer_failure and label in case.vulnerable_sinks:
            # the sink is reached indirectly; the line must still hold a call inside the function
            lines = src.decode("utf-8", "replace").splitlines()
            text = lines[label.line - 1] if 0 < label.line <= len(lines) else ""
            funcs = [f for f in unit.functions() if f.name == label.function]
            inside = funcs and funcs[0].span.start_line <= label.line <= funcs[0].span.end_line
            if inside and re.search(r"\w\s*\(", text) and re.search(rf"\b{re.escape(label.api)}\b", src.decode()):
                continue
        raise CorpusError(f"{case.name}: {label.file}:{label.line} is not a {label.api} call in {label.function}")


def load_case(case_dir: Path, name: str) -> CorpusCase:
    label_path = case_dir / "label.json"
    try:
        raw = json.loads(label_path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise CorpusError(f"{name}: cannot read label.json ({e})") from None
    if not isinstance(raw, dict):
        raise CorpusError(f"{name}: label.json must be an object")
    sources = {p.name: p.read_bytes() for p in sorted(case_dir.glob("*.c"))}
    if not sources:
        raise CorpusError(f"{name}: no source files")
    case = CorpusCase(name, case_dir, sources, _labels(raw, name, "vulnerable_sinks"),
                      _labels(raw, name, "safe_sinks"), bool(raw.get("expect_slicer_failure", False)))
    _validate(case)
    return case


def load_corpus(root: str | Path) -> list[CorpusCase]:
    """Every ``cases/**/label.json`` directory under root, ordered by name."""
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus root {root} is not a directory")
    base = root / "cases" if (root / "cases").is_dir() else root
    cases = [load_case(p.parent, p.parent.relative_to(base).as_posix()) for p in base.rglob("label.json")]
    return sorted(cases, key=lambda c: c.name)


# ---- running --------------------------------------------------------------

@dataclass
class CaseOutcome:
    case: CorpusCase
    files: list[FileResult] = field(default_factory=list)
    findings: list[Finding] = field(default_factory=list)
    matched: list[SinkLabel] = field(default_factory=list)
    false_positives: list[Finding] = field(default_factory=list)
    slices: int = 0
    candidates: int = 0
    usage: list[UsageRecord] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def missed(self) -> list[SinkLabel]:
        return [l for l in self.case.vulnerable_sinks if l not in self.matched]

    @property
    def slicer_failure(self) -> bool:
        return self.slices == 0


def run_case(case: CorpusCase, cfg: Optional[PipelineConfig] = None) -> CaseOutcome:
    cfg = cfg or PipelineConfig()
    out = CaseOutcome(case)
    for fname, data in case.sources.items():
        res = scan_source(data, fname, cfg)
        out.files.append(res)
        out.errors += res.errors
        out.usage += res.usage
        out.candidates += len(res.candidates)
        out.slices += sum(1 for c in res.candidates if c.slice is not None)
        out.findings += res.findings
    unmatched = list(case.vulnerable_sinks)
    for f in out.findings:
        hit = next((l for l in unmatched if l.matches(f)), None)
        if hit is not None:
            unmatched.remove(hit)
            out.matched.append(hit)
        else:
            out.false_positives.append(f)
    return out


def run_bench(cases: list[CorpusCase], cfg: Optional[PipelineConfig] = None) -> list[CaseOutcome]:
    cfg = cfg or PipelineConfig()
    if cfg.jobs == 1:
        return [run_case(c, cfg) for c in cases]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(lambda c: run_case(c, cfg), cases))


# ---- scoring --------------------------------------------------------------

def percent_text(value: Optional[Fraction]) -> str:
    if value is None:
        return EMPTY_MARK
    d = Decimal(value.numerator) * 100 / Decimal(value.denominator)
    return str(d.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class Counts:
    vul: int
    n: int
    tp: int

    @property
    def precision(self) -> Optional[Fraction]:
        return Fraction(self.tp, self.n) if self.n else None

    @property
    def recall(self) -> Optional[Fraction]:
        return Fraction(self.tp, self.vul) if self.vul else None

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.vul + other.vul, self.n + other.n, self.tp + other.tp)


@dataclass
class BenchScore:
    vul: int
    n: int
    tp: int
    per_project: dict[str, Counts]
    usage: UsageReport
    errors: list[str] = field(default_factory=list)

    @property
    def precision(self) -> Optional[Fraction]:
        return Counts(self.vul, self.n, self.tp).precision

    @property
    def recall(self) -> Optional[Fraction]:
        return Counts(self.vul, self.n, self.tp).recall

    def meets(self, min_precision: Fraction, min_recall: Fraction) -> bool:
        p, r = self.precision, self.recall
        return p is not None and r is not None and p * 100 >= min_precision and r * 100 >= min_recall

    def render_text(self) -> str:
        head = f"{'Project':<10} {'#Vul':>5} {'#N':>5} {'#TP':>5} {'P(%)':>7} {'R(%)':>7}"
        rows = [head, "-" * len(head)]
        for name, c in sorted(self.per_project.items()):
            rows.append(f"{name:<10} {c.vul:>5} {c.n:>5} {c.tp:>5} {percent_text(c.precision):>7} {percent_text(c.recall):>7}")
        rows.append("-" * len(head))
        rows.append(f"{'Total':<10} {self.vul:>5} {self.n:>5} {self.tp:>5} "
                    f"{percent_text(self.precision):>7} {percent_text(self.recall):>7}")
        rows.append("")
        rows.append(f"Detected {self.tp}/{self.vul}; P / R = {percent_text(self.precision)} / {percent_text(self.recall)}")
        rows.append(f"Token usage (avg per case): {self.usage.average_text()}; "
                    f"token cost (avg per case): {self.usage.average_cost_text()}")
        for e in self.errors:
            rows.append(f"error: {e}")
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        def frac(x):
            return None if x is None else f"{x.numerator}/{x.denominator}"
        return {
            "vul": self.vul, "n": self.n, "tp": self.tp,
            "precision": percent_text(self.precision), "recall": percent_text(self.recall),
            "precision_exact": frac(self.precision), "recall_exact": frac(self.recall),
            "per_project": {k: {"vul": c.vul, "n": c.n, "tp": c.tp,
                                "precision": percent_text(c.precision), "recall": percent_text(c.recall)}
                            for k, c in sorted(self.per_project.items())},
            "usage": {"per_case": dict(self.usage.per_case), "average_tokens": self.usage.average_text(),
                      "total_tokens": self.usage.total_tokens},
            "errors": list(self.errors),
        }


def score(outcomes: list[CaseOutcome], price_per_token=Fraction(0)) -> BenchScore:
    per: dict[str, Counts] = {}
    for o in outcomes:
        c = Counts(len(o.case.vulnerable_sinks), len(o.findings), len(o.matched))
        per[o.case.group or "all"] = per.get(o.case.group or "all", Counts(0, 0, 0)) + c
    total = sum(per.values(), Counts(0, 0, 0))
    usage = usage_summary([(o.case.name, o.usage) for o in outcomes if o.usage], price_per_token)
    errors = [e for o in outcomes for e in o.errors]
    return BenchScore(total.vul, total.n, total.tp, per, usage, errors)


def outcomes_json(outcomes: list[CaseOutcome]) -> list[dict]:
    return [{
        "case": o.case.name,
        "vulnerable": len(o.case.vulnerable_sinks),
        "findings": len(o.findings),
        "matched": len(o.matched),
        "false_positives": len(o.false_positives),
        "candidates": o.candidates,
        "slices": o.slices,
        "expect_slicer_failure": o.case.expect_slicer_failure,
        "errors": o.errors,
    } for o in sorted(outcomes, key=lambda o: o.case.name)]
