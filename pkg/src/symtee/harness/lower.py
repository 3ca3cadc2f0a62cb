"""Lower a harness C file to loop-free IR for the builtin engine.

Both the template harness and LLM-written harnesses go through this one
path. ``main`` is the entry point; defined functions are inlined, engine
intrinsics become IR statements and sink calls become markers.

Memory is modelled by access paths: every scalar location (``main.size``,
``main.params[0].memref.size``) is one IR variable. Pointers whose target is
statically known are tracked as paths during lowering; anything else reads as
an unconstrained value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .. import hir, tee
from ..cparse import parse_unit
from ..cparse.nodes import (
    BinaryOp, Block, Break, Call, Case, Cast, Conditional, Continue, Declaration, DeclStmt,
    DoWhile, ExprStmt, For, FunctionDef, Goto, Identifier, If, Index, InitList, IntLiteral,
    Label, Member, Node, Opaque, Return, SizeOf, StringLiteral, Switch, TypeName, UnaryOp,
    VarDecl, While, walk,
)
from ..cparse.parser import DuplicateDefinition, NotFound, find_function
from ..cparse.semantics import UnitIndex
from ..hir import FALSE, TRUE, MASK64, LinExpr
from ..slicer import DEFAULT_SINKS
from .model import HarnessConfig, HarnessModel

ABORT_INTRINSICS = {"klee_silent_exit", "klee_abort"}
# Library calls without control-flow effects; results are unconstrained.
LIBC_NOOPS = {"printf", "puts", "fprintf", "putchar", "free", "memset", "strlen", "strnlen",
              "memcmp", "strcmp", "strncmp", "malloc", "calloc", "assert"}
MAX_INLINE_DEPTH = 16
MAX_GOTO_DEPTH = 4


class LoweringError(Exception):
    pass


@dataclass(frozen=True)
class Ptr:
    target: str


Value = Union[LinExpr, Ptr]


@dataclass
class _State:
    ptrs: dict = field(default_factory=dict)
    consts: dict = field(default_factory=dict)
    assigned: set = field(default_factory=set)
    terminated: bool = False

    def copy(self) -> "_State":
        return _State(dict(self.ptrs), dict(self.consts), set(self.assigned), self.terminated)


def _merge(states: list[_State]) -> _State:
    live = [s for s in states if not s.terminated]
    if not live:
        out = states[0].copy()
        out.terminated = True
        return out
    out = live[0].copy()
    for s in live[1:]:
        out.ptrs = {k: v for k, v in out.ptrs.items() if s.ptrs.get(k) == v}
        out.consts = {k: v for k, v in out.consts.items() if s.consts.get(k) == v}
        out.assigned &= s.assigned
    return out


@dataclass
class _Frame:
    name: str
    func: FunctionDef
    locals: dict = field(default_factory=dict)  # C name -> (path, VarDecl)
    ret_var: Optional[str] = None
    exits: list = field(default_factory=list)
    ret_values: list = field(default_factory=list)
    goto_depth: int = 0
    params: set = field(default_factory=set)


_ELEM_RE = re.compile(r"^(.*)\[(\d+)\]$")


def _element(target: str, k: int) -> str:
    if k == 0:
        return target
    m = _ELEM_RE.match(target)
    if m:
        return f"{m.group(1)}[{int(m.group(2)) + k}]"
    return f"{target}[{k}]"


class _Lowerer:
    def __init__(self, unit, config: HarnessConfig, sink_names: set[str]):
        self.unit = unit
        self.index = UnitIndex(unit)
        self.config = config
        self.sink_names = sink_names
        self.functions = {f.name: f for f in unit.functions()}
        self.user_decls: list[hir.SymDecl] = []
        self.havoc_decls: list[hir.SymDecl] = []
        self.prologue: list = []
        self.inited: set[str] = set()
        self.flags: list[str] = []
        self.flag_globals = self._flag_globals()
        self.addresses: dict[str, int] = {}
        self.asserts = 0
        self.calls = 0
        self.temps = 0
        self.strings = 0
        self.out: list[list] = []
        self.st = _State()
        self.frames: list[_Frame] = []

    # -- helpers ---------------------------------------------------------
    def _flag_globals(self) -> set[str]:
        out = set()
        for name, (item, d) in self.index.globals.items():
            if "volatile" in item.type.qualifiers and not d.pointers and not d.array_dims:
                out.add(name)
        return out

    def emit(self, stmt) -> None:
        self.out[-1].append(stmt)

    def origin(self, node: Node) -> Optional[hir.Origin]:
        return hir.Origin(self.unit.file_id, node.span.start_line) if node.span else None

    def havoc(self) -> LinExpr:
        name = f"$h{len(self.havoc_decls) + 1}"
        self.havoc_decls.append(hir.SymDecl(name, 64))
        return LinExpr.var(name)

    def temp(self) -> str:
        self.temps += 1
        return f"%tmp{self.temps}"

    def address(self, target: str) -> LinExpr:
        root = re.split(r"[.\[]", target, maxsplit=1)[0] if not target.startswith("(") else target
        if root not in self.addresses:
            self.addresses[root] = 0x1000_0000 * (len(self.addresses) + 1)
        return LinExpr.of(self.addresses[root])

    def to_lin(self, v: Value) -> LinExpr:
        return self.address(v.target) if isinstance(v, Ptr) else v

    @property
    def frame(self) -> _Frame:
        return self.frames[-1]

    # -- storage ---------------------------------------------------------
    def _is_static(self, loc: str) -> bool:
        return loc.startswith("g.") or loc.startswith("static.") or loc.startswith("str#")

    def ensure_init(self, loc: str) -> None:
        if loc in self.inited or loc in self.st.assigned:
            return
        self.inited.add(loc)
        var = "%" + loc
        if self._is_static(loc):
            value = LinExpr()
            root = loc.split(".", 1)[1] if loc.startswith("g.") else None
            if root in self.index.globals:
                d = self.index.globals[root][1]
                if d.init is not None and not isinstance(d.init, InitList):
                    c = self.index.const_value(d.init)
                    value = LinExpr.of(c) if c is not None else self.havoc()
            if root in self.flag_globals:
                self.flags.append(var)
            self.prologue.append(hir.Assign(var, value))
        else:
            self.prologue.append(hir.Assign(var, self.havoc()))

    def read(self, loc: str) -> Value:
        if loc in self.st.ptrs:
            return Ptr(self.st.ptrs[loc])
        if loc in self.st.consts:
            return LinExpr.of(self.st.consts[loc])
        if loc.endswith("[*]") or "[*]." in loc:
            return self.havoc()
        self.ensure_init(loc)
        return LinExpr.var("%" + loc)

    def write(self, loc: str, v: Value) -> None:
        if "[*]" in loc:
            return  # unknown element of an array; reads of it are unconstrained anyway
        var = "%" + loc
        self.st.assigned.add(loc)
        if isinstance(v, Ptr):
            self.st.ptrs[loc] = v.target
            self.st.consts.pop(loc, None)
            self.emit(hir.Assign(var, self.address(v.target)))
            return
        self.st.ptrs.pop(loc, None)
        if v.is_const:
            self.st.consts[loc] = v.const
        else:
            self.st.consts.pop(loc, None)
        name = loc[2:] if loc.startswith("g.") else None
        if name in self.flag_globals and v.is_const and v.const != 0:
            if var not in self.flags:
                self.flags.append(var)
                self.inited.add(loc)
                self.prologue.append(hir.Assign(var, LinExpr()))
            self.emit(hir.SetFlag(var))
        else:
            self.emit(hir.Assign(var, v))

    def lookup(self, name: str) -> tuple[str, Optional[VarDecl]]:
        if name in self.frame.locals:
            return self.frame.locals[name]
        if name in self.index.globals:
            return "g." + name, self.index.globals[name][1]
        raise LoweringError(f"unknown identifier '{name}'")

    # -- lvalues ---------------------------------------------------------
    def lvalue(self, e: Node) -> str:
        while isinstance(e, Cast):
            e = e.expr
        if isinstance(e, Identifier):
            return self.lookup(e.name)[0]
        if isinstance(e, Member):
            if e.arrow:
                return self.deref(self.value(e.obj)) + "." + e.name
            return self.lvalue(e.obj) + "." + e.name
        if isinstance(e, Index):
            base = self.value(e.base)
            idx = self.to_lin(self.value(e.index))
            target = self.deref(base)
            if idx.is_const:
                return _element(target, idx.const)
            return target + "[*]"
        if isinstance(e, UnaryOp) and e.op == "*" and not e.postfix:
            return self.deref(self.value(e.operand))
        raise LoweringError(f"unsupported assignment target at line {e.span.start_line if e.span else '?'}")

    def deref(self, v: Value) -> str:
        if isinstance(v, Ptr):
            return v.target
        return f"(*{v})"

    # -- expressions -----------------------------------------------------
    def value(self, e: Node) -> Value:
        if isinstance(e, IntLiteral):
            return LinExpr.of(e.value)
        if isinstance(e, StringLiteral):
            self.strings += 1
            return Ptr(f"str#{self.strings}[0]")
        if isinstance(e, Identifier):
            return self.ident_value(e.name)
        if isinstance(e, Cast):
            return self.value(e.expr)
        if isinstance(e, SizeOf):
            return LinExpr.of(self.sizeof(e))
        if isinstance(e, (Member, Index)):
            return self.read(self.lvalue(e))
        if isinstance(e, UnaryOp):
            return self.unary(e)
        if isinstance(e, BinaryOp):
            return self.binary(e)
        if isinstance(e, Conditional):
            c = self.cond(e.cond)
            truth = _static_truth(c)
            if truth is not None:
                return self.value(e.then if truth else e.orelse)
            t = self.temp()
            self.branch_values(c, e.then, e.orelse, t)
            return LinExpr.var(t)
        if isinstance(e, Call):
            return self.call(e)
        if isinstance(e, InitList):
            return self.havoc()
        raise LoweringError(f"unsupported expression {type(e).__name__}")

    def branch_values(self, c, then_e, else_e, t) -> None:
        before = self.st
        results = []
        bodies = []
        for expr in (then_e, else_e):
            self.st = before.copy()
            self.out.append([])
            v = self.to_lin(self.value(expr))
            self.emit(hir.Assign(t, v))
            bodies.append(tuple(self.out.pop()))
            results.append(self.st)
        self.st = _merge(results)
        self.emit(hir.If(c, bodies[0], bodies[1]))

    def ident_value(self, name: str) -> Value:
        if name in self.frame.locals or name in self.index.globals:
            loc, decl = self.lookup(name)
            if decl is not None and decl.array_dims and not (name in self.frame.locals and name in self.frame.params):
                return Ptr(loc + "[0]")
            return self.read(loc)
        if name in self.index.enum_values:
            return LinExpr.of(self.index.enum_values[name])
        if name in self.index.defines:
            return LinExpr.of(self.index.defines[name].value)
        if name in tee.TEE_CONSTANTS:
            return LinExpr.of(tee.TEE_CONSTANTS[name])
        if name in self.functions or name in self.index.functions:
            return Ptr("fn:" + name)
        raise LoweringError(f"unknown identifier '{name}'")

    def sizeof(self, e: SizeOf) -> int:
        if isinstance(e.arg, TypeName):
            return self.index.sizeof_typename(e.arg)
        arg = e.arg
        while isinstance(arg, Cast):
            arg = arg.expr
        if isinstance(arg, Identifier):
            try:
                _, decl = self.lookup(arg.name)
            except LoweringError:
                decl = None
            if decl is not None:
                return self.index.sizeof_decl(decl)
        if isinstance(arg, StringLiteral):
            return sum(len(p) - 1 for p in arg.parts)
        return 8

    def unary(self, e: UnaryOp) -> Value:
        op = e.op
        if op in ("++", "--"):
            loc = self.lvalue(e.operand)
            old = self.read(loc)
            if isinstance(old, Ptr):
                new = Ptr(_element(old.target, 1 if op == "++" else -1) if _ELEM_RE.match(old.target) else old.target + "[*]")
            else:
                if not old.is_const:
                    t = self.temp()
                    self.emit(hir.Assign(t, old))
                    old = LinExpr.var(t)
                new = old + LinExpr.of(1 if op == "++" else -1)
            self.write(loc, new)
            return old if e.postfix else new
        if op == "&":
            inner = e.operand
            while isinstance(inner, Cast):
                inner = inner.expr
            if isinstance(inner, Identifier) and inner.name not in self.frame.locals \
                    and inner.name not in self.index.globals and inner.name in self.functions:
                return Ptr("fn:" + inner.name)
            return Ptr(self.lvalue(inner))
        if op == "*":
            return self.read(self.deref(self.value(e.operand)))
        if op == "!":
            return self.cond_value(e)
        v = self.value(e.operand)
        if op == "+":
            return v
        lin = self.to_lin(v)
        if op == "-":
            return lin.scale(-1)
        if op == "~":
            return LinExpr.of(MASK64) - lin
        raise LoweringError(f"unsupported operator '{op}'")

    def cond_value(self, e: Node) -> LinExpr:
        c = self.cond(e)
        truth = _static_truth(c)
        if truth is not None:
            return LinExpr.of(int(truth))
        t = self.temp()
        self.emit(hir.If(c, (hir.Assign(t, LinExpr.of(1)),), (hir.Assign(t, LinExpr()),)))
        return LinExpr.var(t)

    def binary(self, e: BinaryOp) -> Value:
        op = e.op
        if op in ("=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="):
            loc = self.lvalue(e.left)
            if op == "=":
                v = self.value(e.right)
            else:
                v = self.arith(op[:-1], self.read(loc), self.value(e.right))
            self.write(loc, v)
            return v
        if op == ",":
            self.value(e.left)
            return self.value(e.right)
        if op in ("==", "!=", "<", "<=", ">", ">=", "&&", "||"):
            return self.cond_value(e)
        return self.arith(op, self.value(e.left), self.value(e.right))

    def arith(self, op: str, a: Value, b: Value) -> Value:
        if op in ("+", "-") and isinstance(a, Ptr) and not isinstance(b, Ptr):
            if b.is_const:
                k = b.const if op == "+" else -b.const
                k = k - (1 << 64) if k >= 1 << 63 else k
                if _ELEM_RE.match(a.target) or k >= 0:
                    return Ptr(_element(a.target, k))
            return Ptr(a.target + "[*]")
        if op == "+" and isinstance(b, Ptr) and not isinstance(a, Ptr):
            return self.arith("+", b, a)
        x, y = self.to_lin(a), self.to_lin(b)
        if op == "+":
            return x + y
        if op == "-":
            return x - y
        if x.is_const and y.is_const:
            r = _fold(op, x.const, y.const)
            return LinExpr.of(r) if r is not None else self.havoc()
        if op == "*":
            if x.is_const:
                return y.scale(x.const)
            if y.is_const:
                return x.scale(y.const)
        if op == "<<" and y.is_const and y.const < 64:
            return x.scale(1 << y.const)
        return self.havoc()

    # -- conditions ------------------------------------------------------
    def cond(self, e: Node) -> hir.Cond:
        while isinstance(e, Cast):
            e = e.expr
        if isinstance(e, BinaryOp):
            if e.op == "&&":
                return hir.And(self.cond(e.left), self.cond(e.right))
            if e.op == "||":
                return hir.Or(self.cond(e.left), self.cond(e.right))
            if e.op in ("==", "!=", "<", "<=", ">", ">="):
                a = self.to_lin(self.value(e.left))
                b = self.to_lin(self.value(e.right))
                return _fold_cmp(hir.Cmp(e.op, a, b))
        if isinstance(e, UnaryOp) and e.op == "!" and not e.postfix:
            return hir.Not(self.cond(e.operand))
        if isinstance(e, StringLiteral):
            return TRUE
        v = self.value(e)
        if isinstance(v, Ptr):
            return TRUE
        return _fold_cmp(hir.truthy(v))

    # -- statements ------------------------------------------------------
    def block(self, items) -> None:
        for item in items:
            if self.st.terminated:
                return
            self.stmt(item)

    def stmt(self, s: Node) -> None:
        if isinstance(s, Block):
            self.block(s.items)
        elif isinstance(s, DeclStmt):
            self.declaration(s.decl)
        elif isinstance(s, Declaration):
            self.declaration(s)
        elif isinstance(s, ExprStmt):
            if s.expr is not None:
                self.value(s.expr)
        elif isinstance(s, If):
            self.if_stmt(s)
        elif isinstance(s, Return):
            self.return_stmt(s)
        elif isinstance(s, Label):
            self.stmt(s.stmt)
        elif isinstance(s, Goto):
            self.goto(s)
        elif isinstance(s, (While, DoWhile, For)):
            self.loop(s)
        elif isinstance(s, Switch):
            if not self.irrelevant(s):
                raise LoweringError(f"switch statement at line {s.span.start_line} is not supported")
            self.havoc_assigned(s)
            self.emit(hir.NoOp("switch", self.origin(s)))
        elif isinstance(s, Opaque):
            self.emit(hir.NoOp("opaque", self.origin(s)))
        elif isinstance(s, (Break, Continue, Case)):
            raise LoweringError(f"'{type(s).__name__.lower()}' outside a supported loop at line {s.span.start_line}")
        else:
            raise LoweringError(f"unsupported statement {type(s).__name__}")

    def declaration(self, decl: Declaration) -> None:
        if "typedef" in decl.storage or "extern" in decl.storage:
            return
        static = "static" in decl.storage
        for d in decl.decls:
            if not d.name:
                continue
            if static:
                path = f"static.{self.frame.func.name}.{d.name}"
            else:
                path = f"{self.frame.name}.{d.name}"
            self.frame.locals[d.name] = (path, d)
            if static:
                continue
            for key in [k for k in self.st.consts if k == path or k.startswith(path + ".") or k.startswith(path + "[")]:
                del self.st.consts[key]
            if d.init is not None and not isinstance(d.init, InitList) and not d.array_dims:
                self.write(path, self.value(d.init))

    def if_stmt(self, s: If) -> None:
        c = self.cond(s.cond)
        truth = _static_truth(c)
        if truth is not None:
            branch = s.then if truth else s.orelse
            if branch is not None:
                self.stmt(branch)
            return
        before = self.st
        states, bodies = [], []
        for branch in (s.then, s.orelse):
            self.st = before.copy()
            self.out.append([])
            if branch is not None:
                self.stmt(branch)
            bodies.append(tuple(self.out.pop()))
            states.append(self.st)
        self.st = _merge(states)
        self.emit(hir.If(c, bodies[0], bodies[1], self.origin(s)))

    def return_stmt(self, s: Return) -> None:
        frame = self.frame
        expr = None
        if s.value is not None:
            v = self.value(s.value)
            frame.ret_values.append(v)
            expr = self.to_lin(v)
        self.emit(hir.Return(expr))
        frame.exits.append(self.st.copy())
        self.st.terminated = True

    def goto(self, s: Goto) -> None:
        frame = self.frame
        items = frame.func.body.items
        pos = next((i for i, it in enumerate(items) if isinstance(it, Label) and it.name == s.label), None)
        if pos is None:
            raise LoweringError(f"goto target '{s.label}' is not a top-level label")
        if frame.goto_depth >= MAX_GOTO_DEPTH:
            raise LoweringError(f"goto '{s.label}' forms a cycle")
        frame.goto_depth += 1
        self.block(items[pos:])
        frame.goto_depth -= 1
        if not self.st.terminated:
            self.return_stmt(Return(value=None, span=s.span))

    # -- loops -----------------------------------------------------------
    def irrelevant(self, s: Node) -> bool:
        for n in walk(s):
            if isinstance(n, (Return, Goto)):
                return False
            if isinstance(n, Call):
                name = n.callee
                if name is None or name.startswith("klee_") or name in self.sink_names \
                        or name in tee.ABORT_FUNCTIONS:
                    return False
        return True

    def havoc_assigned(self, s: Node) -> None:
        for n in walk(s):
            target = None
            if isinstance(n, BinaryOp) and n.op.endswith("=") and n.op not in ("==", "!=", "<=", ">="):
                target = n.left
            elif isinstance(n, UnaryOp) and n.op in ("++", "--"):
                target = n.operand
            if target is not None:
                while isinstance(target, Cast):
                    target = target.expr
                if isinstance(target, Identifier):
                    try:
                        loc, _ = self.lookup(target.name)
                    except LoweringError:
                        continue
                    self.write(loc, self.havoc())

    def loop(self, s: Node) -> None:
        if self.irrelevant(s):
            if isinstance(s, For) and s.init is not None:
                self.stmt(s.init)
            self.havoc_assigned(s)
            self.emit(hir.NoOp("loop", self.origin(s)))
            return
        if any(isinstance(n, (Break, Continue)) for n in walk(s.body if not isinstance(s, DoWhile) else s.body)):
            raise LoweringError(f"break/continue in a path-relevant loop at line {s.span.start_line}")
        if isinstance(s, For) and s.init is not None:
            self.stmt(s.init)
        limit = self.config.unroll_limit
        first = True
        for k in range(limit + 1):
            if not (isinstance(s, DoWhile) and first):
                if s.cond is not None:
                    truth = _static_truth(self.cond(s.cond))
                    if truth is None:
                        raise LoweringError(f"loop at line {s.span.start_line} has a symbolic bound")
                    if not truth:
                        return
            first = False
            if k == limit:
                raise LoweringError(f"loop at line {s.span.start_line} exceeds the unroll limit of {limit}")
            self.stmt(s.body)
            if self.st.terminated:
                return
            if isinstance(s, For) and s.step is not None:
                self.value(s.step)

    # -- calls -----------------------------------------------------------
    def call(self, e: Call) -> Value:
        name = e.callee
        if name is None:
            raise LoweringError(f"call through a function pointer at line {e.span.start_line}")
        if name == "klee_make_symbolic":
            return self.make_symbolic(e)
        if name == "klee_assume":
            self.emit(hir.Assume(self.cond(e.args[0])))
            return LinExpr()
        if name == "klee_assert":
            msg = next((n.parts for n in walk(e.args[0]) if isinstance(n, StringLiteral)), ())
            text = "".join(p[1:-1] for p in msg)
            self.emit(hir.Assert(self.cond(e.args[0]), self.asserts, text, self.origin(e)))
            self.asserts += 1
            return LinExpr()
        if name in ABORT_INTRINSICS or (name in tee.ABORT_FUNCTIONS and name not in self.functions):
            for a in e.args:
                self.value(a)
            self.emit(hir.Assume(FALSE))
            self.st.terminated = True
            return LinExpr()
        if name in self.sink_names:
            vals = [self.value(a) for a in e.args]
            self.emit(hir.NoOp(f"sink {name}", self.origin(e)))
            return vals[0] if vals else LinExpr()
        if name in self.functions:
            return self.inline(self.functions[name], e)
        if name in LIBC_NOOPS:
            for a in e.args:
                self.value(a)
            return self.havoc()
        raise LoweringError(f"call to undefined function '{name}'")

    def make_symbolic(self, e: Call) -> LinExpr:
        if len(e.args) != 3 or not isinstance(e.args[2], StringLiteral):
            raise LoweringError("klee_make_symbolic needs (address, size, \"name\")")
        target = e.args[0]
        while isinstance(target, Cast):
            target = target.expr
        if not (isinstance(target, UnaryOp) and target.op == "&"):
            raise LoweringError("klee_make_symbolic on a non-scalar object is not supported")
        inner = target.operand
        loc = self.lvalue(inner)
        decl = None
        if isinstance(inner, Identifier):
            decl = self.lookup(inner.name)[1]
        if decl is not None and (decl.array_dims or decl.type.record is not None
                                 or decl.type.names[:1] in (("struct",), ("union",))):
            raise LoweringError("klee_make_symbolic on an aggregate is not supported")
        name = "".join(p[1:-1] for p in e.args[2].parts)
        if not name or any(d.name == name for d in self.user_decls):
            raise LoweringError(f"symbolic name '{name}' is empty or declared twice")
        size = self.to_lin(self.value(e.args[1]))
        width = 8 * min(8, size.const) if size.is_const and size.const > 0 else 64
        self.user_decls.append(hir.SymDecl(name, width))
        self.write(loc, LinExpr.var(name))
        return LinExpr()

    def inline(self, func: FunctionDef, e: Call) -> Value:
        if len(self.frames) >= MAX_INLINE_DEPTH:
            raise LoweringError(f"inlining depth exceeded at '{func.name}'")
        args = [self.value(a) for a in e.args]
        self.calls += 1
        frame = _Frame(f"{func.name}#{self.calls}", func)
        ret_var = f"%ret.{frame.name}"
        frame.ret_var = ret_var
        self.frames.append(frame)
        self.out.append([])
        for p, v in zip(func.params, args):
            if p.name:
                path = f"{frame.name}.{p.name}"
                frame.locals[p.name] = (path, p)
                frame.params.add(p.name)
                self.write(path, v)
        self.block(func.body.items)
        if not self.st.terminated:
            frame.exits.append(self.st.copy())
        body = tuple(self.out.pop())
        self.frames.pop()
        self.st = _merge(frame.exits) if frame.exits else _terminated(self.st)
        self.emit(hir.Call(func.name, body, ret_var))
        targets = {v.target for v in frame.ret_values if isinstance(v, Ptr)}
        if len(targets) == 1 and all(isinstance(v, Ptr) for v in frame.ret_values):
            return Ptr(next(iter(targets)))
        return LinExpr.var(ret_var)

    # -- entry -----------------------------------------------------------
    def lower_main(self, main: FunctionDef) -> hir.HarnessIR:
        frame = _Frame("main", main)
        self.frames.append(frame)
        self.out.append([])
        self.block(main.body.items)
        body = self.out.pop()
        if not self.asserts:
            raise LoweringError("no oracle")
        ir = hir.HarnessIR(tuple(self.user_decls + self.havoc_decls), tuple(self.prologue + body), tuple(self.flags))
        ir.validate()
        return ir


def _terminated(st: _State) -> _State:
    out = st.copy()
    out.terminated = True
    return out


def _fold(op: str, a: int, b: int) -> Optional[int]:
    if op == "/":
        return a // b if b else None
    if op == "%":
        return a % b if b else None
    if op == "<<":
        return (a << b) & MASK64 if b < 64 else 0
    if op == ">>":
        return a >> b if b < 64 else 0
    if op == "&":
        return a & b
    if op == "|":
        return a | b
    if op == "^":
        return a ^ b
    if op == "*":
        return (a * b) & MASK64
    return None


def _fold_cmp(c: hir.Cmp) -> hir.Cmp:
    if c.lhs.is_const and c.rhs.is_const:
        return TRUE if c.holds({}) else FALSE
    return c


def _static_truth(c: hir.Cond) -> Optional[bool]:
    if c.names():
        return None
    return hir.eval_cond(c, {})


def lift_source_to_hir(source: bytes | str, config: Optional[HarnessConfig] = None,
                       file_id: str = "<harness>", sink_names=None) -> hir.HarnessIR:
    """Parse a harness and lower its ``main``; raises ParseError or LoweringError."""
    config = config or HarnessConfig()
    unit = parse_unit(source, file_id)
    try:
        main = find_function(unit, "main")
    except NotFound:
        raise LoweringError("harness has no main function") from None
    except DuplicateDefinition:
        raise LoweringError("harness defines main twice") from None
    names = set(sink_names) if sink_names is not None else {s.api_name for s in DEFAULT_SINKS}
    return _Lowerer(unit, config, names).lower_main(main)


def render_hir(model: HarnessModel, config: Optional[HarnessConfig] = None) -> hir.HarnessIR:
    from .render import render_source
    config = config or HarnessConfig(domain_bound=model.domain_bound)
    return lift_source_to_hir(render_source(model), config, f"{model.slice.file_id}#harness")
