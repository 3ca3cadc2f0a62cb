"""Vectorised concrete interpreter for harness IR.

Each lane of a numpy ``uint64`` array is one full assignment to the symbolic
inputs, so a whole input domain runs through the IR in a few array passes.
This is independent of the symbolic engine and serves as its test oracle and
as the witness replay check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .. import hir
from ..hir import HarnessIR, LinExpr
from .solver import PathCondition
from .types import Violation, Witness

MAX_ORACLE_SYMBOLS = 2
MAX_ORACLE_BOUND = 1 << 16
CHUNK = 1 << 20


class OracleScopeExceeded(Exception):
    pass


def _u64(v: int) -> np.uint64:
    return np.uint64(v & hir.MASK64)


class _Machine:
    def __init__(self, ir: HarnessIR, columns: dict[str, np.ndarray]):
        self.ir = ir
        self.lanes = len(next(iter(columns.values()))) if columns else 1
        self.env: dict[str, np.ndarray] = dict(columns)
        self.failures: dict[int, np.ndarray] = {}
        self.reached: dict[int, np.ndarray] = {}
        self.frames: list[tuple[np.ndarray, np.ndarray]] = []

    def lin(self, e: LinExpr) -> np.ndarray:
        out = np.full(self.lanes, _u64(e.const), dtype=np.uint64)
        for name, coeff in e.terms:
            out += self.env[name] * _u64(coeff)
        return out

    def cond(self, c) -> np.ndarray:
        if isinstance(c, hir.Cmp):
            a, b = self.lin(c.lhs), self.lin(c.rhs)
            return {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
                    "==": np.equal, "!=": np.not_equal}[c.op](a, b)
        if isinstance(c, hir.Not):
            return ~self.cond(c.cond)
        return self.cond(c.left) & self.cond(c.right)

    def assign(self, var: str, value: np.ndarray, active: np.ndarray) -> None:
        old = self.env.get(var)
        self.env[var] = value.copy() if old is None else np.where(active, value, old)

    def run(self, stmts, active: np.ndarray) -> np.ndarray:
        for s in stmts:
            if not active.any():
                break
            if isinstance(s, hir.Assume):
                active = active & self.cond(s.cond)
            elif isinstance(s, hir.Assign):
                self.assign(s.var, self.lin(s.expr), active)
            elif isinstance(s, hir.SetFlag):
                self.assign(s.name, np.ones(self.lanes, dtype=np.uint64), active)
            elif isinstance(s, hir.If):
                c = self.cond(s.cond)
                active = self.run(s.then, active & c) | self.run(s.orelse, active & ~c)
            elif isinstance(s, hir.Assert):
                c = self.cond(s.cond)
                self.reached[s.site] = self.reached.get(s.site, False) | active
                self.failures[s.site] = self.failures.get(s.site, False) | (active & ~c)
            elif isinstance(s, hir.Return):
                returned, value = self.frames[-1]
                if s.expr is not None:
                    value[:] = np.where(active, self.lin(s.expr), value)
                returned |= active
                active = np.zeros(self.lanes, dtype=bool)
            elif isinstance(s, hir.Call):
                self.frames.append((np.zeros(self.lanes, dtype=bool), np.zeros(self.lanes, dtype=np.uint64)))
                fell = self.run(s.body, active)
                returned, value = self.frames.pop()
                if s.ret_var:
                    self.assign(s.ret_var, value, returned | fell)
                active = fell | returned
        return active

    def execute(self) -> None:
        self.frames.append((np.zeros(self.lanes, dtype=bool), np.zeros(self.lanes, dtype=np.uint64)))
        self.run(self.ir.body, np.ones(self.lanes, dtype=bool))


def run_lanes(ir: HarnessIR, columns: dict[str, np.ndarray]) -> dict[int, np.ndarray]:
    """Failing-lane mask per assert site (sites never reached are absent)."""
    names = ir.symbol_names()
    missing = [n for n in names if n not in columns]
    if missing:
        raise ValueError(f"no values for symbols {missing}")
    m = _Machine(ir, {n: np.asarray(columns[n], dtype=np.uint64) for n in names})
    m.execute()
    return {site: np.asarray(mask, dtype=bool) for site, mask in m.failures.items()}


def replay(ir: HarnessIR, assignment: dict[str, int]) -> set[int]:
    """Assert sites that fail when the IR runs on one concrete assignment."""
    cols = {n: np.array([assignment.get(n, 0)], dtype=np.uint64) for n in ir.symbol_names()}
    return {site for site, mask in run_lanes(ir, cols).items() if mask.any()}


def _domain(ir: HarnessIR, bound: int) -> list[int]:
    return [min(bound, d.max_value) + 1 for d in ir.decls]


def failing_assignments(ir: HarnessIR, bound: int) -> dict[int, np.ndarray]:
    """Every failing assignment per site, rows in lexicographic order."""
    _check_scope(ir, bound)
    names = ir.symbol_names()
    sizes = _domain(ir, bound)
    total = int(np.prod(sizes)) if sizes else 1
    out: dict[int, list[np.ndarray]] = {}
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.uint64)
        cols = {}
        rem = idx
        for name, size in reversed(list(zip(names, sizes))):
            cols[name] = rem % np.uint64(size)
            rem = rem // np.uint64(size)
        for site, mask in run_lanes(ir, cols).items():
            if mask.any():
                rows = np.stack([cols[n][mask] for n in names], axis=1) if names else np.zeros((int(mask.sum()), 0), dtype=np.uint64)
                out.setdefault(site, []).append(rows)
    return {site: np.concatenate(parts) for site, parts in sorted(out.items())}


def _check_scope(ir: HarnessIR, bound: int) -> None:
    if len(ir.decls) > MAX_ORACLE_SYMBOLS:
        raise OracleScopeExceeded(f"{len(ir.decls)} symbols; the oracle handles at most {MAX_ORACLE_SYMBOLS}")
    if bound > MAX_ORACLE_BOUND:
        raise OracleScopeExceeded(f"bound {bound} exceeds {MAX_ORACLE_BOUND}")


def brute_force_oracle(ir: HarnessIR, bound: int) -> list[Violation]:
    """Minimal failing assignment per assert site over [0, bound] per symbol."""
    names = ir.symbol_names()
    domains = {d.name: (0, min(bound, d.max_value)) for d in ir.decls}
    found = []
    for site, rows in failing_assignments(ir, bound).items():
        first = rows[0]
        witness = Witness({n: int(v) for n, v in zip(names, first)})
        found.append(Violation(site, PathCondition([], domains, list(names)), witness, "oracle"))
    return found
