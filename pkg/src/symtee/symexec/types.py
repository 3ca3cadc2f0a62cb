"""Result records shared by the builtin and external engines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..hir import Origin
from .solver import PathCondition


@dataclass(frozen=True)
class Witness:
    assignment: dict[str, int]

    def inputs(self) -> dict[str, int]:
        """The assignment restricted to harness-declared inputs."""
        return {k: v for k, v in self.assignment.items() if not k.startswith("$")}


@dataclass(frozen=True)
class Decision:
    origin: Optional[Origin]
    taken: bool


@dataclass
class Violation:
    assert_site: int
    path: PathCondition
    witness: Witness
    engine: str  # "builtin" | "external" | "oracle"
    message: str = ""
    decisions: tuple[Decision, ...] = ()
    artifact: Optional[str] = None  # external engine test id


@dataclass
class EngineOutcome:
    status: str  # "violations" | "clean" | "unavailable" | "failure"
    violations: list[Violation] = field(default_factory=list)
    log: str = ""

    def __post_init__(self):
        if self.status == "violations" and not self.violations:
            raise ValueError("a violations outcome needs at least one violation")

    @classmethod
    def from_violations(cls, violations: list[Violation], log: str = "") -> "EngineOutcome":
        return cls("violations", list(violations), log) if violations else cls("clean", [], log)
