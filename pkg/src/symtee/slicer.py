"""Find memory-copy sinks, decide whether their length is validated, and cut
self-contained slices around the unvalidated ones.

Analysis is intraprocedural: every question is answered from the enclosing
function body plus file-scope declarations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import tee
from .cparse import parse_unit
from .cparse.nodes import (
    BinaryOp, Block, Call, Case, Cast, Declaration, DeclStmt, Define, DoWhile, EnumDecl,
    ExprStmt, For, FunctionDef, Goto, Identifier, If, Index, IntLiteral, Label, Member,
    Node, RecordDecl, Return, SizeOf, SourceSpan, Switch, TranslationUnit, TypeName,
    TypeSpec, Typedef, UnaryOp, VarDecl, While, walk, walk_with_parents,
)
from .cparse.printer import expr as print_expr
from .cparse.semantics import UnitIndex, local_decls


@dataclass(frozen=True)
class SinkSpec:
    api_name: str
    dest_arg: int = 0
    src_arg: int = 1
    len_arg: int = 2

    def __post_init__(self):
        if len({self.dest_arg, self.src_arg, self.len_arg}) != 3:
            raise ValueError(f"sink {self.api_name}: argument roles must be distinct")

    @property
    def arity(self) -> int:
        return max(self.dest_arg, self.src_arg, self.len_arg) + 1


DEFAULT_SINKS = (
    SinkSpec("TEE_MemMove"),
    SinkSpec("memcpy"),
    SinkSpec("memmove"),
)


def load_sink_specs(path: str | Path) -> tuple[SinkSpec, ...]:
    """Read ``{"sinks": [{"name": ..., "dest": 0, "src": 1, "len": 2}, ...]}``."""
    data = json.loads(Path(path).read_text())
    specs = tuple(SinkSpec(s["name"], int(s.get("dest", 0)), int(s.get("src", 1)), int(s.get("len", 2)))
                  for s in data["sinks"])
    if not specs:
        raise ValueError(f"{path}: no sinks configured")
    return specs


@dataclass
class CapacityInfo:
    kind: str  # "fixed" | "unresolved"
    bytes: Optional[int] = None
    decl_span: Optional[SourceSpan] = None

    @classmethod
    def unresolved(cls) -> "CapacityInfo":
        return cls("unresolved")

    @property
    def fixed(self) -> bool:
        return self.kind == "fixed"


@dataclass
class LengthOrigin:
    """Where the copy length comes from.

    ``kind`` is one of ``constant``, ``param_field`` (member chain rooted at a
    parameter), ``param`` (a scalar parameter used directly),
    ``local_derived`` (single-assignment locals ending at one of the former;
    see ``root``) or ``opaque``.
    """

    kind: str
    expr_span: Optional[SourceSpan] = None
    value: Optional[int] = None
    param_index: Optional[int] = None
    param_name: Optional[str] = None
    field_path: tuple[str, ...] = ()
    chain: tuple[str, ...] = ()
    root: Optional["LengthOrigin"] = None
    root_expr: Optional[Node] = field(default=None, compare=False, repr=False)

    @property
    def base(self) -> "LengthOrigin":
        return self.root if self.kind == "local_derived" and self.root is not None else self

    @property
    def attacker_reachable(self) -> bool:
        return self.base.kind in ("param_field", "param")


@dataclass
class GuardInfo:
    status: str  # "guarded" | "unguarded"
    guard_span: Optional[SourceSpan] = None
    compared_against: Optional[tuple[str, int]] = None  # ("capacity"|"constant", bytes)

    @property
    def guarded(self) -> bool:
        return self.status == "guarded"


@dataclass
class SinkCandidate:
    function_name: str
    call_span: SourceSpan
    spec: SinkSpec
    capacity: Optional[CapacityInfo] = None
    length: Optional[LengthOrigin] = None
    guard: Optional[GuardInfo] = None
    call: Optional[Call] = field(default=None, compare=False, repr=False)
    function: Optional[FunctionDef] = field(default=None, compare=False, repr=False)

    @property
    def file_id(self) -> str:
        return self.call_span.file_id

    @property
    def line(self) -> int:
        return self.call_span.start_line

    @property
    def dest_expr(self) -> Node:
        return self.call.args[self.spec.dest_arg]

    @property
    def len_expr(self) -> Node:
        return self.call.args[self.spec.len_arg]


@dataclass
class Slice:
    function_text: bytes
    required_decls: list[bytes]
    origin: SinkCandidate
    function_name: str = ""
    file_id: str = ""
    start_line: int = 1
    extra_names: frozenset[str] = frozenset()

    def text(self) -> bytes:
        parts = list(self.required_decls) + [self.function_text]
        return b"\n".join(parts) + b"\n"


class SliceError(Exception):
    pass


# -- sink discovery ---------------------------------------------------------

def find_sink_calls(unit: TranslationUnit, specs=DEFAULT_SINKS) -> list[SinkCandidate]:
    """Direct calls to a configured sink API, in source order."""
    if not specs:
        raise ValueError("at least one sink spec is required")
    by_name = {s.api_name: s for s in specs}
    found = []
    for func in unit.functions():
        for node in walk(func.body):
            if isinstance(node, Call) and node.callee in by_name:
                spec = by_name[node.callee]
                if len(node.args) >= spec.arity:
                    found.append(SinkCandidate(func.name, node.span, spec, call=node, function=func))
    found.sort(key=lambda c: (c.call_span.start_byte, c.call_span.end_byte))
    return found


# -- capacity ---------------------------------------------------------------

def strip_casts(e: Node) -> Node:
    while isinstance(e, Cast):
        e = e.expr
    return e


def _dest_array_name(dest: Node) -> Optional[str]:
    dest = strip_casts(dest)
    if isinstance(dest, Identifier):
        return dest.name
    if isinstance(dest, UnaryOp) and dest.op == "&" and not dest.postfix:
        inner = strip_casts(dest.operand)
        if isinstance(inner, Identifier):
            return inner.name
        if isinstance(inner, Index) and isinstance(strip_casts(inner.base), Identifier):
            if isinstance(inner.index, IntLiteral) and inner.index.value == 0:
                return strip_casts(inner.base).name
    return None


def resolve_dest_capacity(cand: SinkCandidate, unit: TranslationUnit,
                          index: Optional[UnitIndex] = None) -> CapacityInfo:
    index = index or UnitIndex(unit)
    name = _dest_array_name(cand.dest_expr)
    if name is None:
        return CapacityInfo.unresolved()
    func = cand.function
    param_names = {p.name for p in func.params}
    if name in param_names:
        return CapacityInfo.unresolved()
    decl = local_decls(func).get(name)
    if decl is None and name in index.globals:
        decl = index.globals[name][1]
    if decl is None or not decl.array_dims:
        return CapacityInfo.unresolved()
    count = index.array_count(decl)
    if count is None:
        return CapacityInfo.unresolved()
    size = count * index.element_size(decl)
    if size <= 0:
        return CapacityInfo.unresolved()
    return CapacityInfo("fixed", size, decl.span)


# -- length origin ----------------------------------------------------------

def expr_key(e: Node) -> str:
    """Canonical text of an expression, ignoring casts and parentheses."""
    return print_expr(_strip_all_casts(e))


def _strip_all_casts(e: Node) -> Node:
    e = strip_casts(e)
    if isinstance(e, Member):
        return Member(obj=_strip_all_casts(e.obj), name=e.name, arrow=e.arrow)
    if isinstance(e, Index):
        return Index(base=_strip_all_casts(e.base), index=_strip_all_casts(e.index))
    if isinstance(e, UnaryOp):
        return UnaryOp(op=e.op, operand=_strip_all_casts(e.operand), postfix=e.postfix)
    return e


def _param_root(e: Node, func: FunctionDef) -> Optional[tuple[int, str, tuple[str, ...]]]:
    """Decompose a member chain rooted at a parameter."""
    path: list[str] = []
    e = strip_casts(e)
    while True:
        if isinstance(e, Member):
            path.append(e.name)
            if e.arrow:
                path.append("*")
            e = strip_casts(e.obj)
        elif isinstance(e, UnaryOp) and e.op == "*" and not e.postfix:
            path.append("*")
            e = strip_casts(e.operand)
        elif isinstance(e, Index):
            if not isinstance(e.index, IntLiteral):
                return None
            path.append(f"[{e.index.value}]")
            e = strip_casts(e.base)
        else:
            break
    if not isinstance(e, Identifier):
        return None
    names = [p.name for p in func.params]
    if e.name not in names:
        return None
    path.reverse()
    # arrow is written "p->f" which we recorded as ["f", "*"] before reversal
    position = names.index(e.name)
    if path and path[0].startswith("["):
        slot = int(path[0][1:-1])
        return slot, e.name, tuple(path[1:])
    return position, e.name, tuple(path)


def _definitions(func: FunctionDef, name: str, before: int) -> tuple[list[Node], bool]:
    """Right-hand sides assigned to local ``name`` before byte offset ``before``.

    The flag is False when the variable is also modified in ways the
    single-assignment rule cannot follow (compound assignment, ++, &name).
    """
    rhs: list[Node] = []
    clean = True
    for node in walk(func.body):
        if isinstance(node, Declaration):
            for d in node.decls:
                if d.name == name and d.init is not None and d.span.start_byte < before:
                    rhs.append(d.init)
        elif isinstance(node, BinaryOp) and node.op in ("=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="):
            target = strip_casts(node.left)
            if isinstance(target, Identifier) and target.name == name:
                if node.op != "=":
                    clean = False
                elif node.span.start_byte < before:
                    rhs.append(node.right)
        elif isinstance(node, UnaryOp) and node.op in ("++", "--", "&"):
            target = strip_casts(node.operand)
            if isinstance(target, Identifier) and target.name == name:
                clean = False
    return rhs, clean


def trace_length_source(cand: SinkCandidate, unit: TranslationUnit,
                        index: Optional[UnitIndex] = None) -> LengthOrigin:
    index = index or UnitIndex(unit)
    return _trace(cand.len_expr, cand.function, cand.call_span.start_byte, index, ())


def _trace(e: Node, func: FunctionDef, before: int, index: UnitIndex, chain: tuple[str, ...]) -> LengthOrigin:
    span = e.span
    value = index.const_value(e)
    if value is not None:
        return _wrap(LengthOrigin("constant", span, value=value, root_expr=e), chain)
    stripped = strip_casts(e)
    root = _param_root(stripped, func)
    if root is not None:
        idx, pname, path = root
        if path:
            return _wrap(LengthOrigin("param_field", span, param_index=idx, param_name=pname,
                                      field_path=path, root_expr=stripped), chain)
        decl = next(p for p in func.params if p.name == pname)
        if not decl.pointers and not decl.array_dims and decl.fnptr_params is None:
            return _wrap(LengthOrigin("param", span, param_index=idx, param_name=pname,
                                      root_expr=stripped), chain)
        return LengthOrigin("opaque", span)
    if isinstance(stripped, Identifier):
        name = stripped.name
        locals_ = local_decls(func)
        if name in locals_ and name not in {p.name for p in func.params} and name not in chain:
            rhs, clean = _definitions(func, name, before)
            if clean and len(rhs) == 1:
                return _trace(rhs[0], func, rhs[0].span.start_byte, index, chain + (name,))
    return LengthOrigin("opaque", span)


def _wrap(origin: LengthOrigin, chain: tuple[str, ...]) -> LengthOrigin:
    if not chain:
        return origin
    return LengthOrigin("local_derived", origin.expr_span, chain=chain, root=origin,
                        root_expr=origin.root_expr)


def length_aliases(cand: SinkCandidate) -> set[str]:
    keys = {expr_key(cand.len_expr)}
    origin = cand.length
    if origin is not None:
        keys.update(origin.chain)
        if origin.root_expr is not None:
            keys.add(expr_key(origin.root_expr))
    return keys


# -- guards -----------------------------------------------------------------

def has_dominating_guard(cand: SinkCandidate, unit: TranslationUnit,
                         index: Optional[UnitIndex] = None) -> GuardInfo:
    index = index or UnitIndex(unit)
    func = cand.function
    capacity = cand.capacity or CapacityInfo.unresolved()
    aliases = length_aliases(cand)
    dest_name = _dest_array_name(cand.dest_expr)
    checker = _GuardChecker(index, aliases, capacity, dest_name)

    ancestors = None
    for node, parents in walk_with_parents(func.body):
        if node is cand.call:
            ancestors = parents + (node,)
            break
    if ancestors is None:
        return GuardInfo("unguarded")

    for i, node in enumerate(ancestors[:-1]):
        child = ancestors[i + 1]
        if isinstance(node, Block):
            for stmt in node.items:
                if stmt is child:
                    break
                hit = checker.exit_guard(stmt)
                if hit:
                    return hit
        elif isinstance(node, If) and child is not node.cond:
            truth = child is node.then
            bound = checker.bound_when(node.cond, truth)
            if bound is not None and checker.acceptable(bound[0]):
                return GuardInfo("guarded", node.span, bound[1])
    return GuardInfo("unguarded")


class _GuardChecker:
    def __init__(self, index: UnitIndex, aliases: set[str], capacity: CapacityInfo, dest_name: Optional[str]):
        self.index = index
        self.aliases = aliases
        self.capacity = capacity
        self.dest_name = dest_name

    def acceptable(self, bound: int) -> bool:
        if not self.capacity.fixed:
            return True
        return bound <= self.capacity.bytes

    def exit_guard(self, stmt: Node) -> Optional[GuardInfo]:
        if isinstance(stmt, Label):
            return self.exit_guard(stmt.stmt)
        if not isinstance(stmt, If):
            return None
        # if (violation) exit;
        if always_exits(stmt.then):
            bound = self.bound_when(stmt.cond, False)
            if bound is not None and self.acceptable(bound[0]):
                return GuardInfo("guarded", stmt.span, bound[1])
        # if (ok) {...} else exit;
        if stmt.orelse is not None and always_exits(stmt.orelse):
            bound = self.bound_when(stmt.cond, True)
            if bound is not None and self.acceptable(bound[0]):
                return GuardInfo("guarded", stmt.span, bound[1])
        return None

    def _constant(self, e: Node) -> Optional[tuple[int, str]]:
        e = strip_casts(e)
        if isinstance(e, SizeOf) and not isinstance(e.arg, TypeName):
            target = strip_casts(e.arg)
            if isinstance(target, Identifier) and target.name == self.dest_name and self.capacity.fixed:
                return self.capacity.bytes, "capacity"
        v = self.index.const_value(e)
        if v is None:
            return None
        return v, "constant"

    def bound_when(self, cond: Node, truth: bool) -> Optional[tuple[int, tuple[str, int]]]:
        """Upper bound on the length implied by ``cond`` evaluating to ``truth``."""
        cond = strip_casts(cond)
        if isinstance(cond, UnaryOp) and cond.op == "!" and not cond.postfix:
            return self.bound_when(cond.operand, not truth)
        if isinstance(cond, BinaryOp) and cond.op in ("&&", "||"):
            a = self.bound_when(cond.left, truth)
            b = self.bound_when(cond.right, truth)
            conjunctive = (cond.op == "&&") == truth
            if conjunctive:
                cands = [x for x in (a, b) if x is not None]
                return min(cands, key=lambda x: x[0]) if cands else None
            if a is not None and b is not None:
                return max(a, b, key=lambda x: x[0])
            return None
        if isinstance(cond, BinaryOp) and cond.op in ("<", "<=", ">", ">=", "==", "!="):
            op = cond.op
            if expr_key(cond.left) in self.aliases and (c := self._constant(cond.right)):
                pass
            elif expr_key(cond.right) in self.aliases and (c := self._constant(cond.left)):
                op = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}[op]
            else:
                return None
            value, against = c
            if not truth:
                op = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}[op]
            bound = {"<": value - 1, "<=": value, "==": value}.get(op)
            if bound is None:
                return None
            return bound, (against, value)
        return None


def always_exits(stmt: Optional[Node]) -> bool:
    if stmt is None:
        return False
    if isinstance(stmt, (Return, Goto)):
        return True
    if isinstance(stmt, ExprStmt):
        call = stmt.expr
        return isinstance(call, Call) and call.callee in tee.ABORT_FUNCTIONS
    if isinstance(stmt, Block):
        return any(always_exits(s) for s in stmt.items)
    if isinstance(stmt, If):
        return always_exits(stmt.then) and always_exits(stmt.orelse)
    if isinstance(stmt, Label):
        return always_exits(stmt.stmt)
    return False


# -- slicing ----------------------------------------------------------------

@dataclass
class References:
    type_names: set[str] = field(default_factory=set)
    tags: set[str] = field(default_factory=set)
    values: set[str] = field(default_factory=set)
    calls: set[str] = field(default_factory=set)
    macros: set[str] = field(default_factory=set)


def collect_references(node: Node, bound: set[str] = frozenset()) -> References:
    """Names a subtree uses but does not declare itself."""
    refs = References()
    callee_ids = set()
    for n in walk(node):
        if isinstance(n, Call) and isinstance(n.func, Identifier):
            callee_ids.add(id(n.func))
            refs.calls.add(n.func.name)
    for n in walk(node):
        if isinstance(n, TypeSpec):
            names = n.names
            if names and names[0] in ("struct", "union", "enum"):
                if len(names) > 1 and not (n.record is not None or n.enum is not None):
                    refs.tags.add(names[1])
            elif len(names) == 1 and names[0] not in _BASE_WORDS:
                refs.type_names.add(names[0])
        elif isinstance(n, Identifier) and id(n) not in callee_ids:
            refs.values.add(n.name)
        elif isinstance(n, IntLiteral) and n.macro:
            refs.macros.add(n.macro)
    refs.values -= set(bound)
    return refs


_BASE_WORDS = frozenset("void char short int long float double signed unsigned _Bool".split())


def extract_slice(cand: SinkCandidate, unit: TranslationUnit,
                  index: Optional[UnitIndex] = None) -> Slice:
    index = index or UnitIndex(unit)
    func = cand.function
    source = unit.source_text
    locals_ = set(local_decls(func))
    refs = collect_references(func, locals_)
    # member names are not values; drop identifiers only seen as enum items declared locally
    needed: list[Node] = []
    seen_items: set[int] = set()
    missing: list[str] = []
    work = [("type", n) for n in sorted(refs.type_names)] + [("tag", n) for n in sorted(refs.tags)] \
        + [("value", n) for n in sorted(refs.values)] + [("macro", n) for n in sorted(refs.macros)]
    funcs_referenced = set(refs.calls)
    while work:
        kind, name = work.pop(0)
        item = _lookup(index, kind, name)
        if item is None:
            if kind == "value" and (name in index.functions or name in funcs_referenced):
                funcs_referenced.add(name)
                continue
            if tee.is_vendor_name(name) or (kind == "value" and name in tee.TEE_CONSTANTS):
                continue
            missing.append(f"{kind} {name}")
            continue
        if isinstance(item, FunctionDef):
            funcs_referenced.add(name)
            continue
        if id(item) in seen_items:
            continue
        seen_items.add(id(item))
        needed.append(item)
        sub = collect_references(item, set())
        for n in sorted(sub.type_names):
            work.append(("type", n))
        for n in sorted(sub.tags):
            work.append(("tag", n))
        for n in sorted(sub.values):
            work.append(("value", n))
        for n in sorted(sub.macros):
            work.append(("macro", n))
    if missing:
        raise SliceError(f"{func.name}: unresolved declarations: {', '.join(sorted(set(missing)))}")
    order = {id(item): i for i, item in enumerate(unit.items)}
    needed.sort(key=lambda it: order[id(it)])
    decls = [it.span.text(source).rstrip() for it in needed]
    return Slice(
        function_text=func.span.text(source),
        required_decls=decls,
        origin=cand,
        function_name=func.name,
        file_id=unit.file_id,
        start_line=func.span.start_line,
        extra_names=frozenset(funcs_referenced - {func.name}),
    )


def _lookup(index: UnitIndex, kind: str, name: str) -> Optional[Node]:
    if kind == "type":
        hit = index.typedefs.get(name)
        return hit[0] if hit else None
    if kind == "tag":
        hit = index.records.get(name)
        return hit[0] if hit else None
    if kind == "macro":
        return index.defines.get(name)
    if kind == "value":
        if name in index.globals:
            return index.globals[name][0]
        if name in index.enum_items:
            return index.enum_items[name]
        if name in index.defines:
            return index.defines[name]
        if name in index.functions:
            return index.functions[name]
    return None


# -- driver -----------------------------------------------------------------

@dataclass
class SliceOutcome:
    candidate: SinkCandidate
    slice: Optional[Slice] = None
    dropped: Optional[str] = None  # reason when no slice was produced


def analyze_candidates(unit: TranslationUnit, specs=DEFAULT_SINKS) -> list[SliceOutcome]:
    """Run the whole slicing stage over one unit."""
    index = UnitIndex(unit)
    outcomes = []
    for cand in find_sink_calls(unit, specs):
        cand.capacity = resolve_dest_capacity(cand, unit, index)
        cand.length = trace_length_source(cand, unit, index)
        cand.guard = has_dominating_guard(cand, unit, index)
        if cand.guard.guarded:
            outcomes.append(SliceOutcome(cand, dropped="guarded"))
            continue
        if cand.length.base.kind == "opaque":
            outcomes.append(SliceOutcome(cand, dropped="opaque length"))
            continue
        try:
            outcomes.append(SliceOutcome(cand, slice=extract_slice(cand, unit, index)))
        except SliceError as exc:
            outcomes.append(SliceOutcome(cand, dropped=f"slice error: {exc}"))
    return outcomes


def slice_source(source: bytes | str, file_id: str = "<memory>", specs=DEFAULT_SINKS) -> list[SliceOutcome]:
    return analyze_candidates(parse_unit(source, file_id), specs)
