"""Deterministic pretty-printer producing normalized, compilable C."""

from __future__ import annotations

from .nodes import (
    BinaryOp, Block, Break, Call, Case, Cast, Conditional, Continue, Declaration, DeclStmt,
    Define, DoWhile, EnumDecl, ExprStmt, For, FunctionDef, Goto, Identifier, If, Include,
    Index, InitList, IntLiteral, Label, Member, Node, Opaque, RecordDecl, Return, SizeOf,
    StringLiteral, Switch, TranslationUnit, TypeName, TypeSpec, Typedef, UnaryOp, VarDecl,
    While,
)

INDENT = "    "

_PREC = {
    ",": 0, "=": 1, "+=": 1, "-=": 1, "*=": 1, "/=": 1, "%=": 1, "<<=": 1, ">>=": 1,
    "&=": 1, "^=": 1, "|=": 1, "?:": 2, "||": 3, "&&": 4, "|": 5, "^": 6, "&": 7,
    "==": 8, "!=": 8, "<": 9, ">": 9, "<=": 9, ">=": 9, "<<": 10, ">>": 10,
    "+": 11, "-": 11, "*": 12, "/": 12, "%": 12,
}
_UNARY_PREC = 13
_POSTFIX_PREC = 14


def pretty_print(unit: TranslationUnit) -> bytes:
    out = []
    prev = None
    for item in unit.items:
        if prev is not None and (isinstance(item, FunctionDef) or isinstance(prev, FunctionDef)):
            out.append("")
        out.append(print_item(item))
        prev = item
    text = "\n".join(out)
    return (text + "\n").encode("utf-8") if text else b""


def print_item(item: Node) -> str:
    if isinstance(item, (Include, Define, Opaque)):
        return item.text
    if isinstance(item, FunctionDef):
        head = _storage(item.storage) + type_spec(item.ret) + " " + "*" * item.ret_pointers + item.name
        head += "(" + _params(item.params, item.variadic) + ")"
        if item.body is None:
            return head + ";"
        return head + "\n" + print_stmt(item.body, 0)
    if isinstance(item, Typedef):
        return "typedef " + type_spec(item.type) + " " + ", ".join(declarator(d) for d in item.decls) + ";"
    if isinstance(item, Declaration):
        return declaration(item) + ";"
    if isinstance(item, RecordDecl):
        return record(item, 0) + ";"
    if isinstance(item, EnumDecl):
        return enum(item) + ";"
    raise TypeError(f"cannot print top-level {type(item).__name__}")


def _storage(storage) -> str:
    return "".join(s + " " for s in storage)


def declaration(decl: Declaration, level: int = 0) -> str:
    text = _storage(decl.storage) + type_spec(decl.type, level)
    if decl.decls:
        text += " " + ", ".join(declarator(d, level) for d in decl.decls)
    return text


def type_spec(spec: TypeSpec, level: int = 0) -> str:
    quals = "".join(q + " " for q in spec.qualifiers)
    if spec.record is not None:
        return quals + record(spec.record, level)
    if spec.enum is not None:
        return quals + enum(spec.enum)
    return quals + spec.base


def record(rec: RecordDecl, level: int) -> str:
    head = rec.kind + (" " + rec.tag if rec.tag else "")
    if rec.fields is None:
        return head
    inner = INDENT * (level + 1)
    lines = [head + " {"]
    for f in rec.fields:
        lines.append(inner + declaration(f, level + 1) + ";")
    lines.append(INDENT * level + "}")
    return "\n".join(lines)


def enum(e: EnumDecl) -> str:
    head = "enum" + (" " + e.tag if e.tag else "")
    if e.items is None:
        return head
    parts = [name + (" = " + expr(v) if v is not None else "") for name, v in e.items]
    return head + " { " + ", ".join(parts) + " }"


def declarator(d: VarDecl, level: int = 0) -> str:
    if d.fnptr_params is not None:
        text = "*" * d.pointers + "(*" + (d.name or "") + ")(" + \
            _params(d.fnptr_params, d.fnptr_variadic) + ")"
    else:
        text = "*" * d.pointers + (d.name or "")
    for dim in d.array_dims:
        text += "[" + (expr(dim) if dim is not None else "") + "]"
    if d.bitfield is not None:
        text += " : " + expr(d.bitfield)
    if d.init is not None:
        text += " = " + expr(d.init)
    return text


def _params(params, variadic: bool) -> str:
    if not params and not variadic:
        return "void"
    parts = []
    for p in params:
        d = declarator(p)
        parts.append(type_spec(p.type) + (" " + d if d else ""))
    if variadic:
        parts.append("...")
    return ", ".join(parts)


def type_name(tn: TypeName) -> str:
    text = type_spec(tn.spec)
    if tn.pointers:
        text += " " + "*" * tn.pointers
    for dim in tn.array_dims:
        text += "[" + (expr(dim) if dim is not None else "") + "]"
    return text


# -- statements -------------------------------------------------------------

def print_stmt(stmt: Node, level: int) -> str:
    pad = INDENT * level
    if isinstance(stmt, Block):
        lines = [pad + "{"]
        for item in stmt.items:
            lines.append(print_stmt(item, level + 1))
        lines.append(pad + "}")
        return "\n".join(lines)
    if isinstance(stmt, DeclStmt):
        return pad + declaration(stmt.decl, level) + ";"
    if isinstance(stmt, ExprStmt):
        return pad + (expr(stmt.expr) if stmt.expr is not None else "") + ";"
    if isinstance(stmt, If):
        text = pad + "if (" + expr(stmt.cond) + ")\n" + _body(stmt.then, level)
        if stmt.orelse is not None:
            text += "\n" + pad + "else\n" + _body(stmt.orelse, level)
        return text
    if isinstance(stmt, While):
        return pad + "while (" + expr(stmt.cond) + ")\n" + _body(stmt.body, level)
    if isinstance(stmt, DoWhile):
        return pad + "do\n" + _body(stmt.body, level) + "\n" + pad + "while (" + expr(stmt.cond) + ");"
    if isinstance(stmt, For):
        if stmt.init is None:
            init = ";"
        elif isinstance(stmt.init, DeclStmt):
            init = declaration(stmt.init.decl) + ";"
        else:
            init = expr(stmt.init.expr) + ";"
        cond = " " + expr(stmt.cond) if stmt.cond is not None else ""
        step = " " + expr(stmt.step) if stmt.step is not None else ""
        return pad + "for (" + init + cond + ";" + step + ")\n" + _body(stmt.body, level)
    if isinstance(stmt, Return):
        return pad + "return" + (" " + expr(stmt.value) if stmt.value is not None else "") + ";"
    if isinstance(stmt, Break):
        return pad + "break;"
    if isinstance(stmt, Continue):
        return pad + "continue;"
    if isinstance(stmt, Goto):
        return pad + "goto " + stmt.label + ";"
    if isinstance(stmt, Label):
        return stmt.name + ":\n" + print_stmt(stmt.stmt, level)
    if isinstance(stmt, Switch):
        return pad + "switch (" + expr(stmt.cond) + ")\n" + _body(stmt.body, level)
    if isinstance(stmt, Case):
        head = pad + ("case " + expr(stmt.value) + ":" if stmt.value is not None else "default:")
        return head + "\n" + print_stmt(stmt.stmt, level + 1)
    if isinstance(stmt, (Opaque, Include, Define)):
        return pad + stmt.text
    raise TypeError(f"cannot print statement {type(stmt).__name__}")


def _body(stmt: Node, level: int) -> str:
    if isinstance(stmt, Block):
        return print_stmt(stmt, level)
    return print_stmt(stmt, level + 1)


# -- expressions ------------------------------------------------------------

def expr(e: Node, parent_prec: int = 0) -> str:
    text, prec = _expr(e)
    return "(" + text + ")" if prec < parent_prec else text


def _expr(e: Node) -> tuple[str, int]:
    if isinstance(e, Identifier):
        return e.name, 99
    if isinstance(e, IntLiteral):
        return (e.macro if e.macro else e.text), 99
    if isinstance(e, StringLiteral):
        return " ".join(e.parts), 99
    if isinstance(e, Call):
        args = ", ".join(expr(a, 1) for a in e.args)
        return expr(e.func, _POSTFIX_PREC) + "(" + args + ")", _POSTFIX_PREC
    if isinstance(e, Index):
        return expr(e.base, _POSTFIX_PREC) + "[" + expr(e.index) + "]", _POSTFIX_PREC
    if isinstance(e, Member):
        return expr(e.obj, _POSTFIX_PREC) + ("->" if e.arrow else ".") + e.name, _POSTFIX_PREC
    if isinstance(e, UnaryOp):
        if e.postfix:
            return expr(e.operand, _POSTFIX_PREC) + e.op, _POSTFIX_PREC
        inner = expr(e.operand, _UNARY_PREC)
        # keep "- -x" and "& &x" from fusing into other tokens
        sep = " " if inner[:1] == e.op[-1:] or (e.op in "+-" and inner[:1] in "+-") else ""
        return e.op + sep + inner, _UNARY_PREC
    if isinstance(e, Cast):
        return "(" + type_name(e.type) + ")" + expr(e.expr, _UNARY_PREC), _UNARY_PREC
    if isinstance(e, SizeOf):
        if isinstance(e.arg, TypeName):
            return "sizeof(" + type_name(e.arg) + ")", _UNARY_PREC
        return "sizeof(" + expr(e.arg) + ")", _UNARY_PREC
    if isinstance(e, Conditional):
        p = _PREC["?:"]
        return expr(e.cond, p + 1) + " ? " + expr(e.then) + " : " + expr(e.orelse, p), p
    if isinstance(e, InitList):
        return "{" + ", ".join(expr(i, 1) for i in e.items) + "}", 99
    if isinstance(e, BinaryOp):
        p = _PREC[e.op]
        if p == 1:  # right-assoc assignment
            return expr(e.left, p + 1) + " " + e.op + " " + expr(e.right, p), p
        if e.op == ",":
            return expr(e.left, p) + ", " + expr(e.right, p + 1), p
        return expr(e.left, p) + " " + e.op + " " + expr(e.right, p + 1), p
    raise TypeError(f"cannot print expression {type(e).__name__}")
