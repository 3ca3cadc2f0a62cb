"""Just enough name resolution and constant folding for capacity analysis."""

from __future__ import annotations

from typing import Optional

from .. import tee
from .nodes import (
    BinaryOp, Cast, Declaration, Define, EnumDecl, FunctionDef, Identifier, IntLiteral,
    Node, RecordDecl, SizeOf, TranslationUnit, TypeName, TypeSpec, Typedef, UnaryOp,
    VarDecl, Conditional, walk,
)

BASE_SIZES = {"char": 1, "short": 2, "int": 4, "long": 8, "_Bool": 1, "float": 4, "double": 8}
DEFAULT_SIZE = 8
POINTER_SIZE = 8


class UnitIndex:
    """Top-level names of a translation unit, in declaration order."""

    def __init__(self, unit: TranslationUnit):
        self.unit = unit
        self.typedefs: dict[str, tuple[Node, VarDecl]] = {}
        self.records: dict[str, tuple[Node, RecordDecl]] = {}
        self.globals: dict[str, tuple[Node, VarDecl]] = {}
        self.enum_values: dict[str, int] = {}
        self.enum_items: dict[str, Node] = {}
        self.defines: dict[str, Define] = {}
        self.functions: dict[str, FunctionDef] = {}
        for item in unit.items:
            self._index(item)

    def _index(self, item: Node) -> None:
        if isinstance(item, Define):
            self.defines[item.name] = item
        elif isinstance(item, FunctionDef):
            if item.body is not None or item.name not in self.functions:
                self.functions[item.name] = item
        elif isinstance(item, Typedef):
            self._index_spec(item, item.type)
            for d in item.decls:
                if d.name:
                    self.typedefs[d.name] = (item, d)
        elif isinstance(item, Declaration):
            self._index_spec(item, item.type)
            for d in item.decls:
                if d.name:
                    self.globals[d.name] = (item, d)
        elif isinstance(item, RecordDecl):
            self._index_record(item, item)
        elif isinstance(item, EnumDecl):
            self._index_enum(item, item)

    def _index_spec(self, item: Node, spec: TypeSpec) -> None:
        if spec.record is not None:
            self._index_record(item, spec.record)
        if spec.enum is not None:
            self._index_enum(item, spec.enum)

    def _index_record(self, item: Node, rec: RecordDecl) -> None:
        if rec.tag and rec.fields is not None:
            self.records[rec.tag] = (item, rec)
        for f in rec.fields or ():
            self._index_spec(item, f.type)

    def _index_enum(self, item: Node, enum: EnumDecl) -> None:
        nxt = 0
        for name, value in enum.items or ():
            if value is not None:
                v = self.const_value(value)
                nxt = v if v is not None else nxt
            self.enum_values[name] = nxt
            self.enum_items[name] = item
            nxt += 1

    # -- constants -------------------------------------------------------
    def const_value(self, expr: Node) -> Optional[int]:
        if isinstance(expr, IntLiteral):
            return expr.value
        if isinstance(expr, Identifier):
            if expr.name in self.enum_values:
                return self.enum_values[expr.name]
            return None
        if isinstance(expr, Cast):
            return self.const_value(expr.expr)
        if isinstance(expr, SizeOf):
            if isinstance(expr.arg, TypeName):
                return self.sizeof_typename(expr.arg)
            return None
        if isinstance(expr, UnaryOp) and not expr.postfix:
            v = self.const_value(expr.operand)
            if v is None:
                return None
            return {"-": -v, "+": v, "~": ~v, "!": int(not v)}.get(expr.op)
        if isinstance(expr, Conditional):
            c = self.const_value(expr.cond)
            if c is None:
                return None
            return self.const_value(expr.then if c else expr.orelse)
        if isinstance(expr, BinaryOp):
            a, b = self.const_value(expr.left), self.const_value(expr.right)
            if a is None or b is None:
                return None
            return fold_binary(expr.op, a, b)
        return None

    # -- sizes -----------------------------------------------------------
    def sizeof_spec(self, spec: TypeSpec, depth: int = 0) -> int:
        names = spec.names
        if depth > 16:
            return DEFAULT_SIZE
        if names and names[0] in ("struct", "union"):
            rec = spec.record
            if rec is None and len(names) > 1 and names[1] in self.records:
                rec = self.records[names[1]][1]
            return self.sizeof_record(rec, depth) if rec is not None else DEFAULT_SIZE
        if names and names[0] == "enum":
            return 4
        if len(names) == 1 and not _is_base(names[0]):
            name = names[0]
            if name in self.typedefs:
                return self.sizeof_decl(self.typedefs[name][1], depth + 1)
            if name in tee.STD_TYPES:
                return tee.STD_TYPES[name]
            if name in tee.TEE_INT_TYPES:
                return tee.TEE_INT_TYPES[name]
            return DEFAULT_SIZE
        for word in ("char", "short", "double", "float", "_Bool"):
            if word in names:
                return BASE_SIZES[word]
        if "long" in names:
            return 8
        if "int" in names or "signed" in names or "unsigned" in names:
            return 4
        if "void" in names:
            return 1
        return DEFAULT_SIZE

    def sizeof_decl(self, d: VarDecl, depth: int = 0) -> int:
        if d.pointers or d.fnptr_params is not None:
            size = POINTER_SIZE
        else:
            size = self.sizeof_spec(d.type, depth)
        for dim in d.array_dims:
            n = self.const_value(dim) if dim is not None else None
            size *= n if n is not None else 1
        return size

    def sizeof_record(self, rec: RecordDecl, depth: int = 0) -> int:
        sizes = [self.sizeof_decl(d, depth + 1) for f in rec.fields or () for d in f.decls]
        if not sizes:
            return DEFAULT_SIZE
        return max(sizes) if rec.kind == "union" else sum(sizes)

    def sizeof_typename(self, tn: TypeName) -> int:
        size = POINTER_SIZE if tn.pointers else self.sizeof_spec(tn.spec)
        for dim in tn.array_dims:
            n = self.const_value(dim) if dim is not None else None
            size *= n if n is not None else 1
        return size

    def element_size(self, d: VarDecl) -> int:
        if d.pointers or d.fnptr_params is not None:
            return POINTER_SIZE
        return self.sizeof_spec(d.type)

    def array_count(self, d: VarDecl) -> Optional[int]:
        if not d.array_dims:
            return None
        count = 1
        for dim in d.array_dims:
            n = self.const_value(dim) if dim is not None else None
            if n is None or n <= 0:
                return None
            count *= n
        return count


def fold_binary(op: str, a: int, b: int) -> Optional[int]:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return int(a / b) if b else None
    if op == "%":
        return a - int(a / b) * b if b else None
    if op == "<<":
        return a << b if 0 <= b < 128 else None
    if op == ">>":
        return a >> b if 0 <= b < 128 else None
    if op == "&":
        return a & b
    if op == "|":
        return a | b
    if op == "^":
        return a ^ b
    if op == "&&":
        return int(bool(a) and bool(b))
    if op == "||":
        return int(bool(a) or bool(b))
    if op in ("==", "!=", "<", "<=", ">", ">="):
        return int({"==": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op])
    return None


def _is_base(word: str) -> bool:
    return word in BASE_SIZES or word in ("signed", "unsigned", "void")


def local_decls(func: FunctionDef) -> dict[str, VarDecl]:
    """Parameters and body-level declarations, first declaration wins."""
    out: dict[str, VarDecl] = {}
    for p in func.params:
        if p.name:
            out.setdefault(p.name, p)
    if func.body is not None:
        for n in walk(func.body):
            if isinstance(n, Declaration):
                for d in n.decls:
                    if d.name:
                        out.setdefault(d.name, d)
    return out
