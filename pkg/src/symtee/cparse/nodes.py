"""AST node classes for the C subset.

Every node carries a :class:`SourceSpan` that is excluded from equality, so
two trees compare equal when they have the same structure regardless of
where the text sat in the file.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class SourceSpan:
    file_id: str
    start_byte: int
    end_byte: int
    start_line: int
    end_line: int

    def contains(self, other: "SourceSpan") -> bool:
        return self.start_byte <= other.start_byte and other.end_byte <= self.end_byte

    def text(self, source: bytes) -> bytes:
        return source[self.start_byte:self.end_byte]


def _span_field():
    return field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class Node:
    span: Optional[SourceSpan] = _span_field()


# -- types -----------------------------------------------------------------

@dataclass
class TypeSpec(Node):
    """Declaration specifiers minus storage class.

    ``names`` holds the base type words, e.g. ``("unsigned", "long")``,
    ``("struct", "foo")`` or ``("TEE_Param",)``.
    """

    names: tuple[str, ...]
    qualifiers: tuple[str, ...] = ()
    record: Optional["RecordDecl"] = None
    enum: Optional["EnumDecl"] = None

    @property
    def base(self) -> str:
        return " ".join(self.names)


@dataclass
class TypeName(Node):
    """An abstract type as used by casts and ``sizeof``."""

    spec: TypeSpec
    pointers: int = 0
    array_dims: list = field(default_factory=list)


# -- declarations ----------------------------------------------------------

@dataclass
class VarDecl(Node):
    name: Optional[str]
    type: TypeSpec
    pointers: int = 0
    array_dims: list = field(default_factory=list)
    fnptr_params: Optional[list] = None
    fnptr_variadic: bool = False
    init: Optional["Expr"] = None
    bitfield: Optional["Expr"] = None

    @property
    def is_array(self) -> bool:
        return bool(self.array_dims)


Param = VarDecl


@dataclass
class Declaration(Node):
    storage: tuple[str, ...]
    type: TypeSpec
    decls: list[VarDecl] = field(default_factory=list)


@dataclass
class Typedef(Node):
    type: TypeSpec
    decls: list[VarDecl] = field(default_factory=list)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.decls if d.name]


@dataclass
class RecordDecl(Node):
    kind: str  # "struct" | "union"
    tag: Optional[str]
    fields: Optional[list[Declaration]] = None  # None for a forward reference


@dataclass
class EnumDecl(Node):
    tag: Optional[str]
    items: Optional[list[tuple[str, Optional["Expr"]]]] = None


@dataclass
class FunctionDef(Node):
    name: str
    ret: TypeSpec
    ret_pointers: int = 0
    params: list[VarDecl] = field(default_factory=list)
    variadic: bool = False
    storage: tuple[str, ...] = ()
    body: Optional["Block"] = None


@dataclass
class Include(Node):
    text: str


@dataclass
class Define(Node):
    name: str
    value: int
    text: str


@dataclass
class Opaque(Node):
    """Region the parser keeps verbatim (directives, inline asm, ...)."""

    text: str


# -- statements ------------------------------------------------------------

@dataclass
class Block(Node):
    items: list = field(default_factory=list)


@dataclass
class DeclStmt(Node):
    decl: Declaration


@dataclass
class ExprStmt(Node):
    expr: Optional["Expr"]


@dataclass
class If(Node):
    cond: "Expr"
    then: Node
    orelse: Optional[Node] = None


@dataclass
class While(Node):
    cond: "Expr"
    body: Node


@dataclass
class DoWhile(Node):
    body: Node
    cond: "Expr"


@dataclass
class For(Node):
    init: Optional[Node]
    cond: Optional["Expr"]
    step: Optional["Expr"]
    body: Node


@dataclass
class Return(Node):
    value: Optional["Expr"] = None


@dataclass
class Break(Node):
    pass


@dataclass
class Continue(Node):
    pass


@dataclass
class Goto(Node):
    label: str


@dataclass
class Label(Node):
    name: str
    stmt: Node


@dataclass
class Switch(Node):
    cond: "Expr"
    body: Node


@dataclass
class Case(Node):
    value: Optional["Expr"]  # None for ``default``
    stmt: Node


# -- expressions -----------------------------------------------------------

@dataclass
class Identifier(Node):
    name: str


@dataclass
class IntLiteral(Node):
    value: int
    text: str
    macro: Optional[str] = None


@dataclass
class StringLiteral(Node):
    parts: tuple[str, ...]  # raw spellings including the quotes


@dataclass
class Call(Node):
    func: "Expr"
    args: list = field(default_factory=list)

    @property
    def callee(self) -> Optional[str]:
        return self.func.name if isinstance(self.func, Identifier) else None


@dataclass
class BinaryOp(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass
class UnaryOp(Node):
    op: str
    operand: "Expr"
    postfix: bool = False


@dataclass
class Member(Node):
    obj: "Expr"
    name: str
    arrow: bool = False


@dataclass
class Index(Node):
    base: "Expr"
    index: "Expr"


@dataclass
class Cast(Node):
    type: TypeName
    expr: "Expr"


@dataclass
class SizeOf(Node):
    arg: Union[TypeName, "Expr"]


@dataclass
class Conditional(Node):
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"


@dataclass
class InitList(Node):
    items: list = field(default_factory=list)


Expr = Union[Identifier, IntLiteral, StringLiteral, Call, BinaryOp, UnaryOp,
             Member, Index, Cast, SizeOf, Conditional, InitList]

ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "^=", "|="})


@dataclass
class TranslationUnit(Node):
    items: list = field(default_factory=list)
    source_text: bytes = field(default=b"", compare=False, repr=False)
    file_id: str = field(default="<memory>", compare=False)

    def functions(self) -> Iterator[FunctionDef]:
        for item in self.items:
            if isinstance(item, FunctionDef) and item.body is not None:
                yield item


def children(node: Node) -> Iterator[Node]:
    """Direct child nodes in field order."""
    for f in fields(node):
        if f.name == "span":
            continue
        yield from _nodes_in(getattr(node, f.name))


def _nodes_in(value) -> Iterator[Node]:
    if isinstance(value, Node):
        yield value
    elif isinstance(value, (list, tuple)):
        for v in value:
            yield from _nodes_in(v)


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


def walk_with_parents(node: Node, parents: tuple = ()) -> Iterator[tuple[Node, tuple]]:
    yield node, parents
    for c in children(node):
        yield from walk_with_parents(c, parents + (node,))
