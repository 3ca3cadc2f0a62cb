"""Feasibility of path conditions over bounded unsigned integers.

Decision procedure: bounds propagation over the linear constraints,
difference-bound cycle detection when propagation converges slowly, then a
lexicographic branch-and-propagate search for the minimal model. When the
search budget runs out and the domains are small, plain enumeration decides.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from ..hir import MASK64, Cmp, LinExpr

MOD = 1 << 64
MAX_SYMBOLS_PER_CONSTRAINT = 3
ENUMERATION_LIMIT = 1 << 24


class UnsupportedConstraint(Exception):
    pass


@dataclass
class PathCondition:
    constraints: list[Cmp]
    domains: dict[str, tuple[int, int]]
    order: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.order:
            self.order = list(self.domains)
        for c in self.constraints:
            unknown = c.names() - set(self.domains)
            if unknown:
                raise ValueError(f"constraint {c} uses undeclared symbols {sorted(unknown)}")

    def holds(self, model: dict[str, int]) -> bool:
        for name, (lo, hi) in self.domains.items():
            if not lo <= model.get(name, 0) <= hi:
                return False
        return all(c.holds(model) for c in self.constraints)

    def __str__(self) -> str:
        return " && ".join(str(c) for c in self.constraints) or "true"


@dataclass
class Feasible:
    model: dict[str, int]


class Infeasible:
    def __repr__(self):
        return "Infeasible"


INFEASIBLE = Infeasible()


@dataclass(frozen=True)
class _Lin:
    """sum(coeffs[i] * x_i) + const  OP  0, over mathematical integers."""

    coeffs: tuple[tuple[str, int], ...]
    const: int
    op: str  # "<=" | "==" | "!="


def _signed_coeffs(e: LinExpr) -> dict[str, int]:
    out = {}
    for n, c in e.terms:
        c &= MASK64
        out[n] = c - MOD if c >= MOD // 2 else c
    return out


def _range(coeffs: dict[str, int], const: int, dom) -> tuple[int, int]:
    lo = hi = const
    for n, a in coeffs.items():
        l, h = dom[n]
        if a >= 0:
            lo += a * l
            hi += a * h
        else:
            lo += a * h
            hi += a * l
    return lo, hi


def _side(e: LinExpr, dom) -> tuple[dict[str, int], int, list[int]]:
    """Integer form of one comparison side plus the wrap counts it can take."""
    coeffs = _signed_coeffs(e)
    const = e.const & MASK64
    if const >= MOD // 2 and coeffs:
        const -= MOD
    lo, hi = _range(coeffs, const, dom)
    wraps = list(range(lo // MOD, hi // MOD + 1))
    return coeffs, const, wraps


def _linearize(cmps: list[Cmp], dom) -> list[list[_Lin]]:
    """Expand modular comparisons into alternative integer constraint sets."""
    alternatives: list[list[_Lin]] = [[]]
    for cmp in cmps:
        if len(cmp.names()) > MAX_SYMBOLS_PER_CONSTRAINT:
            raise UnsupportedConstraint(f"{cmp}: more than {MAX_SYMBOLS_PER_CONSTRAINT} symbols")
        lc, lk, lw = _side(cmp.lhs, dom)
        rc, rk, rw = _side(cmp.rhs, dom)
        options = []
        for kl, kr in itertools.product(lw, rw):
            group = []
            # side value = side - k*MOD, which must lie in [0, MOD)
            for coeffs, const, k, wraps in ((lc, lk, kl, lw), (rc, rk, kr, rw)):
                if len(wraps) > 1:
                    base = tuple(sorted(coeffs.items()))
                    group.append(_Lin(tuple((n, -a) for n, a in base), k * MOD - const, "<="))
                    group.append(_Lin(base, const - k * MOD - (MOD - 1), "<="))
            diff = dict(lc)
            for n, a in rc.items():
                diff[n] = diff.get(n, 0) - a
            const = (lk - kl * MOD) - (rk - kr * MOD)
            group.append(_compare(cmp.op, diff, const))
            options.append(group)
        if len(alternatives) * len(options) > 256:
            raise UnsupportedConstraint("too many wrap-around cases")
        alternatives = [a + o for a in alternatives for o in options]
    return alternatives


def _compare(op: str, diff: dict[str, int], const: int) -> _Lin:
    """lhs - rhs = diff + const; express ``lhs op rhs`` as a _Lin."""
    pos = tuple(sorted((n, a) for n, a in diff.items() if a))
    neg = tuple((n, -a) for n, a in pos)
    if op == "<=":
        return _Lin(pos, const, "<=")
    if op == "<":
        return _Lin(pos, const + 1, "<=")
    if op == ">=":
        return _Lin(neg, -const, "<=")
    if op == ">":
        return _Lin(neg, -const + 1, "<=")
    if op == "==":
        return _Lin(pos, const, "==")
    if op == "!=":
        return _Lin(pos, const, "!=")
    raise UnsupportedConstraint(f"operator {op}")


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class _Budget(Exception):
    pass


class _Search:
    def __init__(self, cons: list[_Lin], order: list[str], max_steps: int = 20000):
        self.cons = cons
        self.order = order
        self.steps = 0
        self.max_steps = max_steps

    def propagate(self, dom: dict[str, list[int]]) -> bool:
        rounds = 0
        changed = True
        while changed:
            changed = False
            rounds += 1
            if rounds > 200:
                if self._negative_cycle(dom):
                    return False
                return True
            for c in self.cons:
                r = self._tighten(c, dom)
                if r is None:
                    return False
                changed |= r
        return True

    def _tighten(self, c: _Lin, dom) -> Optional[bool]:
        changed = False
        if c.op == "!=":
            free = [(n, a) for n, a in c.coeffs if dom[n][0] != dom[n][1]]
            fixed = c.const + sum(a * dom[n][0] for n, a in c.coeffs if dom[n][0] == dom[n][1])
            if not free:
                return None if fixed == 0 else False
            if len(free) == 1:
                n, a = free[0]
                if (-fixed) % a == 0:
                    v = (-fixed) // a
                    lo, hi = dom[n]
                    if v == lo:
                        dom[n][0] = lo + 1
                        changed = True
                    elif v == hi:
                        dom[n][1] = hi - 1
                        changed = True
                    if dom[n][0] > dom[n][1]:
                        return None
            return changed
        forms = [c.coeffs] if c.op == "<=" else [c.coeffs, tuple((n, -a) for n, a in c.coeffs)]
        consts = [c.const] if c.op == "<=" else [c.const, -c.const]
        for coeffs, const in zip(forms, consts):
            mins = {n: (a * dom[n][0] if a > 0 else a * dom[n][1]) for n, a in coeffs}
            total = const + sum(mins.values())
            if total > 0:
                return None
            for n, a in coeffs:
                rest = -(total - mins[n])  # a*x <= rest
                lo, hi = dom[n]
                if a > 0:
                    new_hi = _floor_div(rest, a)
                    if new_hi < hi:
                        dom[n][1] = new_hi
                        changed = True
                else:
                    new_lo = _ceil_div(rest, a)
                    if new_lo > lo:
                        dom[n][0] = new_lo
                        changed = True
                if dom[n][0] > dom[n][1]:
                    return None
                mins[n] = a * dom[n][0] if a > 0 else a * dom[n][1]
                total = const + sum(mins.values())
        return changed

    def _negative_cycle(self, dom) -> bool:
        """Bellman-Ford over the pure difference constraints x - y <= c."""
        edges = []
        for c in self.cons:
            forms = [(c.coeffs, c.const)] if c.op == "<=" else (
                [(c.coeffs, c.const), (tuple((n, -a) for n, a in c.coeffs), -c.const)] if c.op == "==" else [])
            for coeffs, const in forms:
                if len(coeffs) == 2 and sorted(a for _, a in coeffs) == [-1, 1]:
                    x = next(n for n, a in coeffs if a == 1)
                    y = next(n for n, a in coeffs if a == -1)
                    edges.append((y, x, -const))  # x - y <= -const
        if not edges:
            return False
        nodes = {n for e in edges for n in e[:2]}
        dist = {n: 0 for n in nodes}
        for _ in range(len(nodes)):
            updated = False
            for u, v, w in edges:
                if dist[u] + w < dist[v]:
                    dist[v] = dist[u] + w
                    updated = True
            if not updated:
                return False
        return True

    def satisfied(self, model: dict[str, int]) -> bool:
        for c in self.cons:
            v = c.const + sum(a * model[n] for n, a in c.coeffs)
            if c.op == "<=" and v > 0 or c.op == "==" and v != 0 or c.op == "!=" and v == 0:
                return False
        return True

    def solve(self, dom: dict[str, list[int]]) -> Optional[dict[str, int]]:
        self.steps += 1
        if self.steps > self.max_steps:
            raise _Budget()
        if not self.propagate(dom):
            return None
        free = next((n for n in self.order if dom[n][0] != dom[n][1]), None)
        if free is None:
            model = {n: dom[n][0] for n in self.order}
            return model if self.satisfied(model) else None
        lo = dom[free][0]
        while lo <= dom[free][1]:
            trial = {n: list(b) for n, b in dom.items()}
            trial[free] = [lo, lo]
            model = self.solve(trial)
            if model is not None:
                return model
            # exclude the failed value and let propagation skip ahead
            dom = {n: list(b) for n, b in dom.items()}
            dom[free][0] = lo + 1
            if not self.propagate(dom):
                return None
            lo = dom[free][0]
        return None


def _enumerate(cons: list[_Lin], order: list[str], dom) -> Optional[dict[str, int]]:
    ranges = [range(dom[n][0], dom[n][1] + 1) for n in order]
    search = _Search(cons, order)
    for values in itertools.product(*ranges):
        model = dict(zip(order, values))
        if search.satisfied(model):
            return model
    return None


def _lex_key(model: dict[str, int], order: list[str]) -> tuple:
    return tuple(model[n] for n in order)


def check_feasible(pc: PathCondition) -> Feasible | Infeasible:
    """Decide ``pc``; a feasible answer carries the lexicographically smallest model."""
    order = list(pc.order)
    base = {n: [lo, hi] for n, (lo, hi) in pc.domains.items()}
    for lo, hi in base.values():
        if lo > hi:
            return INFEASIBLE
    best = None
    for cons in _linearize(pc.constraints, pc.domains):
        dom = {n: list(b) for n, b in base.items()}
        search = _Search(cons, order)
        try:
            model = search.solve(dom)
        except _Budget:
            size = 1
            for n in order:
                size *= base[n][1] - base[n][0] + 1
            if size > ENUMERATION_LIMIT:
                raise UnsupportedConstraint(f"undecided within search budget: {pc}")
            model = _enumerate(cons, order, base)
        if model is not None and (best is None or _lex_key(model, order) < _lex_key(best, order)):
            best = model
    if best is None:
        return INFEASIBLE
    if not pc.holds(best):  # defensive: the model must satisfy the original modular form
        raise AssertionError(f"solver produced a non-model {best} for {pc}")
    return Feasible(best)
