"""Depth-first symbolic exploration of harness IR."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .. import hir
from ..hir import HarnessIR, LinExpr
from .concrete import replay
from .solver import INFEASIBLE, Feasible, PathCondition, check_feasible
from .types import Decision, EngineOutcome, Violation, Witness


class PathBudgetExceeded(Exception):
    pass


class DiscrepancyError(Exception):
    """Two engines, or an engine and its own replay, disagree."""


@dataclass(frozen=True)
class ExecConfig:
    path_budget: int = 4096
    max_constraints: int = 256
    domain_cap: Optional[int] = None


@dataclass(frozen=True)
class AssertHit:
    site: int
    cond: hir.Cond
    message: str
    origin: Optional[hir.Origin]


@dataclass
class PathResult:
    condition: PathCondition
    decisions: tuple[Decision, ...]
    reached_asserts: tuple[AssertHit, ...]
    env: dict[str, LinExpr]
    returned: bool


@dataclass
class _State:
    env: dict
    constraints: tuple = ()
    decisions: tuple = ()
    asserts: tuple = ()
    ret: Optional[LinExpr] = None

    def fork(self) -> "_State":
        return _State(dict(self.env), self.constraints, self.decisions, self.asserts, self.ret)


class _Explorer:
    def __init__(self, ir: HarnessIR, config: ExecConfig):
        self.ir = ir
        self.config = config
        self.order = ir.symbol_names()
        cap = config.domain_cap
        self.domains = {d.name: (0, d.max_value if cap is None else min(cap, d.max_value)) for d in ir.decls}
        self.paths = 0

    def pc(self, constraints) -> PathCondition:
        return PathCondition(list(constraints), self.domains, self.order)

    def feasible(self, constraints) -> bool:
        return check_feasible(self.pc(constraints)) is not INFEASIBLE

    def subst(self, env, e: LinExpr) -> LinExpr:
        for n in e.names():
            if n not in env and n not in self.domains:
                raise RuntimeError(f"IR reads {n} before assigning it")
        return e.substitute(env)

    def extend(self, st: _State, atoms) -> Optional[_State]:
        """Add atoms to the path condition, or None when the result is infeasible."""
        added = []
        for a in atoms:
            a = hir.Cmp(a.op, self.subst(st.env, a.lhs), self.subst(st.env, a.rhs))
            if not a.names():
                if not a.holds({}):
                    return None
                continue
            added.append(a)
        if not added:
            return st
        constraints = st.constraints + tuple(added)
        if len(constraints) > self.config.max_constraints:
            raise PathBudgetExceeded(f"path exceeds {self.config.max_constraints} constraints")
        if not self.feasible(constraints):
            return None
        out = st.fork()
        out.constraints = constraints
        return out

    def branches(self, st: _State, cond, truth: bool):
        for atoms in hir.decisions(cond, truth):
            nxt = self.extend(st, atoms)
            if nxt is not None:
                yield nxt

    def run(self, stmts, i: int, st: _State) -> Iterator[tuple[_State, bool]]:
        """Yield (final state, returned) for every feasible completion of stmts[i:]."""
        while i < len(stmts):
            s = stmts[i]
            if isinstance(s, hir.Assign):
                st.env[s.var] = self.subst(st.env, s.expr)
            elif isinstance(s, hir.SetFlag):
                st.env[s.name] = LinExpr.of(1)
            elif isinstance(s, hir.Assume):
                for nxt in self.branches(st, s.cond, True):
                    yield from self.run(stmts, i + 1, nxt.fork())
                return
            elif isinstance(s, hir.Assert):
                cond = _subst_cond(s.cond, st.env, self)
                st.asserts = st.asserts + (AssertHit(s.site, cond, s.message, s.origin),)
            elif isinstance(s, hir.If):
                for truth, body in ((True, s.then), (False, s.orelse)):
                    for nxt in self.branches(st, s.cond, truth):
                        nxt = nxt.fork()
                        nxt.decisions = nxt.decisions + (Decision(s.origin, truth),)
                        for end, returned in self.run(body, 0, nxt):
                            if returned:
                                yield end, True
                            else:
                                yield from self.run(stmts, i + 1, end)
                return
            elif isinstance(s, hir.Return):
                st.ret = self.subst(st.env, s.expr) if s.expr is not None else None
                yield st, True
                return
            elif isinstance(s, hir.Call):
                inner = st.fork()
                inner.ret = None
                for end, _ in self.run(s.body, 0, inner):
                    end = end.fork()
                    if s.ret_var:
                        end.env[s.ret_var] = end.ret if end.ret is not None else LinExpr()
                    end.ret = None
                    yield from self.run(stmts, i + 1, end)
                return
            i += 1
        yield st, False

    def explore(self) -> Iterator[PathResult]:
        root = _State({})
        start = self.extend(root, [])
        if start is None or not self.feasible(()):
            return
        for end, returned in self.run(self.ir.body, 0, start):
            self.paths += 1
            if self.paths > self.config.path_budget:
                raise PathBudgetExceeded(f"more than {self.config.path_budget} paths")
            yield PathResult(self.pc(end.constraints), end.decisions, end.asserts, end.env, returned)


def _subst_cond(c, env, ex: _Explorer):
    if isinstance(c, hir.Cmp):
        return hir.Cmp(c.op, ex.subst(env, c.lhs), ex.subst(env, c.rhs))
    if isinstance(c, hir.Not):
        return hir.Not(_subst_cond(c.cond, env, ex))
    return hir.And(_subst_cond(c.left, env, ex), _subst_cond(c.right, env, ex))


def explore(ir: HarnessIR, config: Optional[ExecConfig] = None) -> list[PathResult]:
    return list(_Explorer(ir, config or ExecConfig()).explore())


def find_violations(ir: HarnessIR, config: Optional[ExecConfig] = None) -> list[Violation]:
    """One violation per (feasible path, failing assert), each with its minimal witness."""
    config = config or ExecConfig()
    ex = _Explorer(ir, config)
    found: list[Violation] = []
    for path in ex.explore():
        for hit in path.reached_asserts:
            best = None
            for atoms in hir.decisions(hit.cond, False):
                extra = []
                ok = True
                for a in atoms:
                    if not a.names():
                        ok = ok and a.holds({})
                    else:
                        extra.append(a)
                if not ok:
                    continue
                pc = ex.pc(list(path.condition.constraints) + extra)
                res = check_feasible(pc)
                if isinstance(res, Feasible):
                    key = tuple(res.model[n] for n in ex.order)
                    if best is None or key < best[0]:
                        best = (key, pc, res.model)
            if best is None:
                continue
            _, pc, model = best
            witness = Witness({n: model[n] for n in ex.order})
            if not pc.holds(witness.assignment):
                raise DiscrepancyError(f"witness {witness.assignment} does not satisfy its path condition")
            if hit.site not in replay(ir, witness.assignment):
                raise DiscrepancyError(f"witness {witness.assignment} does not reproduce assert #{hit.site}")
            found.append(Violation(hit.site, pc, witness, "builtin", hit.message, path.decisions))
    return found


def run_builtin(ir: HarnessIR, config: Optional[ExecConfig] = None) -> EngineOutcome:
    return EngineOutcome.from_violations(find_violations(ir, config))


def minimal_by_site(violations: list[Violation]) -> dict[int, Witness]:
    """Smallest witness per assert site, in lexicographic symbol order."""
    out: dict[int, tuple] = {}
    for v in violations:
        key = tuple(v.witness.assignment.values())
        if v.assert_site not in out or key < out[v.assert_site][0]:
            out[v.assert_site] = (key, v.witness)
    return {site: w for site, (_, w) in sorted(out.items())}
