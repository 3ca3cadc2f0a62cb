"""Loop-free harness IR shared by the harness lowering and the engines.

Values are linear expressions over named symbols and program variables,
evaluated modulo 2**64. Program variables are the names that start with
``%``; every other name is a symbolic input declared by a :class:`SymDecl`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

MASK64 = (1 << 64) - 1
NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}
FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


@dataclass(frozen=True)
class LinExpr:
    const: int = 0
    terms: tuple[tuple[str, int], ...] = ()

    @staticmethod
    def of(value: int) -> "LinExpr":
        return LinExpr(value & MASK64)

    @staticmethod
    def var(name: str, coeff: int = 1) -> "LinExpr":
        return LinExpr(0, ((name, coeff),)) if coeff else LinExpr()

    @property
    def is_const(self) -> bool:
        return not self.terms

    def names(self) -> set[str]:
        return {n for n, _ in self.terms}

    def __add__(self, other: "LinExpr") -> "LinExpr":
        acc = dict(self.terms)
        for n, c in other.terms:
            acc[n] = acc.get(n, 0) + c
        return _make(self.const + other.const, acc)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + other.scale(-1)

    def scale(self, k: int) -> "LinExpr":
        return _make(self.const * k, {n: c * k for n, c in self.terms})

    def substitute(self, env: dict[str, "LinExpr"]) -> "LinExpr":
        out = LinExpr(self.const)
        for n, c in self.terms:
            out = out + (env[n].scale(c) if n in env else LinExpr.var(n, c))
        return out

    def evaluate(self, values: dict[str, int]) -> int:
        return (self.const + sum(c * values[n] for n, c in self.terms)) & MASK64

    def __str__(self) -> str:
        parts = []
        for n, c in self.terms:
            c = _signed(c)
            if c == 1:
                parts.append(n)
            elif c == -1:
                parts.append("-" + n)
            else:
                parts.append(f"{c}*{n}")
        const = _signed(self.const)
        if const or not parts:
            parts.append(str(const))
        return " + ".join(parts).replace("+ -", "- ")


def _signed(v: int) -> int:
    v &= MASK64
    return v - (1 << 64) if v >= 1 << 63 else v


def _make(const: int, coeffs: dict[str, int]) -> LinExpr:
    terms = tuple(sorted((n, c & MASK64) for n, c in coeffs.items() if c & MASK64))
    return LinExpr(const & MASK64, terms)


# -- conditions -------------------------------------------------------------

@dataclass(frozen=True)
class Cmp:
    op: str
    lhs: LinExpr
    rhs: LinExpr

    def negate(self) -> "Cmp":
        return Cmp(NEGATE[self.op], self.lhs, self.rhs)

    def substitute(self, env) -> "Cmp":
        return Cmp(self.op, self.lhs.substitute(env), self.rhs.substitute(env))

    def names(self) -> set[str]:
        return self.lhs.names() | self.rhs.names()

    def holds(self, values: dict[str, int]) -> bool:
        a, b = self.lhs.evaluate(values), self.rhs.evaluate(values)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "==": a == b, "!=": a != b}[self.op]

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class Not:
    cond: "Cond"

    def substitute(self, env) -> "Not":
        return Not(self.cond.substitute(env))

    def names(self) -> set[str]:
        return self.cond.names()

    def __str__(self) -> str:
        return f"!({self.cond})"


@dataclass(frozen=True)
class And:
    left: "Cond"
    right: "Cond"

    def substitute(self, env) -> "And":
        return And(self.left.substitute(env), self.right.substitute(env))

    def names(self) -> set[str]:
        return self.left.names() | self.right.names()

    def __str__(self) -> str:
        return f"({self.left}) && ({self.right})"


Cond = Union[Cmp, Not, And]

TRUE = Cmp("==", LinExpr(), LinExpr())
FALSE = Cmp("!=", LinExpr(), LinExpr())


def Or(a: Cond, b: Cond) -> Cond:
    return Not(And(Not(a), Not(b)))


def truthy(e: LinExpr) -> Cmp:
    return Cmp("!=", e, LinExpr())


def decisions(cond: Cond, truth: bool) -> list[list[Cmp]]:
    """Mutually exclusive conjunctions of comparisons under which ``cond == truth``.

    The split follows C short-circuit evaluation, so each conjunction is one
    branch sequence a compiled program could take.
    """
    if isinstance(cond, Cmp):
        return [[cond if truth else cond.negate()]]
    if isinstance(cond, Not):
        return decisions(cond.cond, not truth)
    if isinstance(cond, And):
        left_true = decisions(cond.left, True)
        if truth:
            return [a + b for a in left_true for b in decisions(cond.right, True)]
        return decisions(cond.left, False) + [a + b for a in left_true for b in decisions(cond.right, False)]
    raise TypeError(cond)


def eval_cond(cond: Cond, values: dict[str, int]) -> bool:
    if isinstance(cond, Cmp):
        return cond.holds(values)
    if isinstance(cond, Not):
        return not eval_cond(cond.cond, values)
    return eval_cond(cond.left, values) and eval_cond(cond.right, values)


# -- statements -------------------------------------------------------------

@dataclass(frozen=True)
class SymDecl:
    name: str
    width_bits: int = 64

    @property
    def max_value(self) -> int:
        return (1 << self.width_bits) - 1


@dataclass(frozen=True)
class Origin:
    """Source location a statement was lowered from."""

    file: str
    line: int


@dataclass(frozen=True)
class Assume:
    cond: Cond


@dataclass(frozen=True)
class Assign:
    var: str
    expr: LinExpr


@dataclass(frozen=True)
class If:
    cond: Cond
    then: tuple = ()
    orelse: tuple = ()
    origin: Optional[Origin] = None


@dataclass(frozen=True)
class SetFlag:
    name: str


@dataclass(frozen=True)
class Return:
    expr: Optional[LinExpr] = None


@dataclass(frozen=True)
class Assert:
    cond: Cond
    site: int
    message: str = ""
    origin: Optional[Origin] = None


@dataclass(frozen=True)
class NoOp:
    label: str = ""
    origin: Optional[Origin] = None


@dataclass(frozen=True)
class Call:
    """Inlined call; a ``Return`` inside ``body`` leaves only this call."""

    name: str
    body: tuple = ()
    ret_var: Optional[str] = None


Stmt = Union[Assume, Assign, If, SetFlag, Return, Assert, NoOp, Call]


@dataclass(frozen=True)
class HarnessIR:
    decls: tuple[SymDecl, ...]
    body: tuple
    flags: tuple[str, ...] = ()

    def symbol_names(self) -> list[str]:
        return [d.name for d in self.decls]

    def asserts(self) -> list[Assert]:
        return [s for s in iter_stmts(self.body) if isinstance(s, Assert)]

    def validate(self) -> None:
        declared = set(self.symbol_names())
        if len(declared) != len(self.decls):
            raise ValueError("duplicate symbol declaration")
        assigned = set(self.flags)
        for s in iter_stmts(self.body):
            if isinstance(s, Assign):
                assigned.add(s.var)
            elif isinstance(s, Call) and s.ret_var:
                assigned.add(s.ret_var)
        for s in iter_stmts(self.body):
            for name in stmt_names(s):
                if name.startswith("%"):
                    if name not in assigned:
                        raise ValueError(f"variable {name} is never assigned")
                elif name not in declared and name not in self.flags:
                    raise ValueError(f"symbol {name} is not declared")

    def __str__(self) -> str:
        lines = [f"sym {d.name}: u{d.width_bits}" for d in self.decls]
        lines += format_stmts(self.body, 0)
        return "\n".join(lines)


def iter_stmts(stmts: Iterable) -> Iterator:
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from iter_stmts(s.then)
            yield from iter_stmts(s.orelse)
        elif isinstance(s, Call):
            yield from iter_stmts(s.body)


def stmt_names(s) -> set[str]:
    if isinstance(s, (Assume, If, Assert)):
        return s.cond.names()
    if isinstance(s, Assign):
        return s.expr.names()
    if isinstance(s, Return) and s.expr is not None:
        return s.expr.names()
    return set()


def format_stmts(stmts, level: int) -> list[str]:
    pad = "  " * level
    out = []
    for s in stmts:
        if isinstance(s, Assume):
            out.append(f"{pad}assume {s.cond}")
        elif isinstance(s, Assign):
            out.append(f"{pad}{s.var} = {s.expr}")
        elif isinstance(s, SetFlag):
            out.append(f"{pad}set {s.name}")
        elif isinstance(s, Return):
            out.append(f"{pad}return" + (f" {s.expr}" if s.expr is not None else ""))
        elif isinstance(s, Assert):
            out.append(f"{pad}assert#{s.site} {s.cond}")
        elif isinstance(s, NoOp):
            out.append(f"{pad}noop {s.label}")
        elif isinstance(s, If):
            out.append(f"{pad}if {s.cond}:")
            out += format_stmts(s.then, level + 1)
            if s.orelse:
                out.append(f"{pad}else:")
                out += format_stmts(s.orelse, level + 1)
        elif isinstance(s, Call):
            out.append(f"{pad}call {s.name}" + (f" -> {s.ret_var}" if s.ret_var else "") + ":")
            out += format_stmts(s.body, level + 1)
    return out
