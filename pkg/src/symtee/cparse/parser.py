"""Recursive-descent parser for the C subset found in trusted applications."""

from __future__ import annotations

from typing import Optional

from .. import tee
from .lexer import LexError, Token, preprocess, tokenize
from .nodes import (
    Block, Break, Call, Case, Cast, Conditional, Continue, Declaration, DeclStmt, Define,
    DoWhile, EnumDecl, ExprStmt, For, FunctionDef, Goto, Identifier, If, Include, Index,
    InitList, IntLiteral, Label, Member, Node, Opaque, RecordDecl, Return, SizeOf,
    SourceSpan, StringLiteral, Switch, TranslationUnit, TypeName, TypeSpec, Typedef,
    UnaryOp, VarDecl, While, BinaryOp,
)

MAX_SOURCE_BYTES = 4 * 1024 * 1024

BASE_TYPE_WORDS = frozenset(
    "void char short int long float double signed unsigned _Bool".split())
QUALIFIERS = frozenset({"const", "volatile", "restrict"})
STORAGE = frozenset({"static", "extern", "typedef", "inline", "register", "auto",
                     "__inline", "__inline__"})
BUILTIN_TYPEDEFS = frozenset(tee.STD_TYPES) | frozenset(tee.TEE_INT_TYPES) \
    | frozenset(tee.TEE_RECORD_TYPES) | frozenset(tee.TEE_HANDLE_TYPES)

BINARY_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, ">": 7, "<=": 7, ">=": 7,
    "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}
ASSIGNMENT = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "^=", "|="})


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int, expected=()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{detail}")


class NotFound(LookupError):
    pass


class DuplicateDefinition(LookupError):
    pass


class _Parser:
    def __init__(self, tokens: list[Token], source: bytes, file_id: str):
        self.toks = tokens
        self.pos = 0
        self.source = source
        self.file_id = file_id
        self.typedefs: set[str] = set(BUILTIN_TYPEDEFS)
        eof_at = len(source)
        line = source.count(b"\n") + 1
        self.eof = Token("eof", "", eof_at, eof_at, line, line, 1)

    # -- token helpers -----------------------------------------------------
    def peek(self, k: int = 0) -> Token:
        i = self.pos + k
        return self.toks[i] if i < len(self.toks) else self.eof

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.kind in ("punct", "keyword") and tok.text in texts

    def accept(self, *texts: str) -> Optional[Token]:
        if self.at(*texts):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind in ("punct", "keyword") and tok.text == text:
            return self.next()
        raise self.error(f"unexpected {tok.text or tok.kind!r}", {text})

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind == "ident":
            return self.next()
        raise self.error(f"unexpected {tok.text or tok.kind!r}", {"identifier"})

    def error(self, message: str, expected=()) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column, expected)

    def span(self, first: Token, last: Optional[Token] = None) -> SourceSpan:
        if last is None:
            last = self.toks[self.pos - 1] if self.pos > 0 else first
        return SourceSpan(self.file_id, first.start, last.end, first.line, last.end_line)

    def raw(self, first: Token, last: Token) -> str:
        return self.source[first.start:last.end].decode("utf-8")

    # -- classification ----------------------------------------------------
    def is_type_start(self, k: int = 0) -> bool:
        tok = self.peek(k)
        if tok.kind == "keyword":
            return (tok.text in BASE_TYPE_WORDS or tok.text in QUALIFIERS or tok.text in STORAGE
                    or tok.text in ("struct", "union", "enum"))
        if tok.kind == "ident":
            if tok.text in self.typedefs or tok.text == "__attribute__":
                return True
        return False

    def looks_like_declaration(self) -> bool:
        if self.is_type_start():
            tok, nxt = self.peek(), self.peek(1)
            # a typedef name used as an expression, e.g. ``size_t(x)`` never occurs
            # in C; ``foo_t * bar`` with a known typedef is a declaration.
            return not (tok.kind == "ident" and nxt.is_punct("=", "(", ".", "->", "[", "++", "--"))
        tok, nxt = self.peek(), self.peek(1)
        if tok.kind != "ident":
            return False
        if nxt.kind == "ident":
            return True
        if nxt.is_punct("*"):
            k = 1
            while self.peek(k).is_punct("*"):
                k += 1
            after, after2 = self.peek(k), self.peek(k + 1)
            if after.kind == "ident" and after2.is_punct("=", ";", ",", "[", ")"):
                return tok.text.endswith("_t") or tok.text[:1].isupper()
        return False

    # -- top level ---------------------------------------------------------
    def parse_unit(self) -> TranslationUnit:
        items = []
        while self.peek().kind != "eof":
            items.append(self.external_item())
        span = SourceSpan(self.file_id, 0, len(self.source), 1, self.eof.line)
        return TranslationUnit(items=items, source_text=self.source, file_id=self.file_id, span=span)

    def external_item(self) -> Node:
        tok = self.peek()
        if tok.kind in ("include", "define", "opaque"):
            return self.directive_node(self.next())
        if tok.is_punct(";"):
            self.next()
            return Opaque(text=";", span=self.span(tok, tok))
        return self.declaration(top_level=True)

    def directive_node(self, tok: Token) -> Node:
        span = self.span(tok, tok)
        text = self.raw(tok, tok).rstrip()
        if tok.kind == "include":
            return Include(text=text, span=span)
        if tok.kind == "define":
            return Define(name=tok.name, value=tok.value, text=text, span=span)
        return Opaque(text=text, span=span)

    # -- declarations ------------------------------------------------------
    def skip_attributes(self) -> None:
        while self.peek().kind == "ident" and self.peek().text in ("__attribute__", "__attribute"):
            self.next()
            self.expect("(")
            depth = 1
            while depth:
                t = self.next()
                if t.kind == "eof":
                    raise self.error("unterminated attribute")
                if t.is_punct("("):
                    depth += 1
                elif t.is_punct(")"):
                    depth -= 1

    def decl_specifiers(self) -> tuple[tuple[str, ...], TypeSpec]:
        first = self.peek()
        storage: list[str] = []
        quals: list[str] = []
        names: list[str] = []
        record = enum = None
        while True:
            self.skip_attributes()
            tok = self.peek()
            if tok.kind == "keyword" and tok.text in STORAGE:
                storage.append(self.next().text)
            elif tok.kind == "keyword" and tok.text in QUALIFIERS:
                quals.append(self.next().text)
            elif tok.kind == "keyword" and tok.text in BASE_TYPE_WORDS:
                if names and names[0] in ("struct", "union", "enum") or (names and not _is_base_word(names[-1])):
                    break
                names.append(self.next().text)
            elif tok.kind == "keyword" and tok.text in ("struct", "union"):
                if names:
                    break
                record = self.record_spec()
                names = [record.kind] + ([record.tag] if record.tag else [])
            elif tok.kind == "keyword" and tok.text == "enum":
                if names:
                    break
                enum = self.enum_spec()
                names = ["enum"] + ([enum.tag] if enum.tag else [])
            elif tok.kind == "ident" and not names and (
                    tok.text in self.typedefs or self._unknown_typedef_here()):
                names.append(self.next().text)
            else:
                break
        if not names:
            if quals or storage:
                names = ["int"]
            else:
                raise self.error(f"unexpected {self.peek().text or self.peek().kind!r}", {"type specifier"})
        spec = TypeSpec(names=tuple(names), qualifiers=tuple(quals), record=(record if record and record.fields is not None else None),
                        enum=(enum if enum and enum.items is not None else None), span=self.span(first))
        return tuple(storage), spec

    def _unknown_typedef_here(self) -> bool:
        tok, nxt = self.peek(), self.peek(1)
        if nxt.kind == "ident" or nxt.is_punct("*") and self.peek(2).kind == "ident":
            return True
        if nxt.is_punct("*", ")") and (tok.text.endswith("_t") or tok.text[:1].isupper()):
            return True
        return False

    def record_spec(self) -> RecordDecl:
        first = self.next()
        self.skip_attributes()
        tag = self.next().text if self.peek().kind == "ident" else None
        fields_ = None
        if self.accept("{"):
            fields_ = []
            while not self.at("}"):
                fstart = self.peek()
                _, spec = self.decl_specifiers()
                decls = []
                if not self.at(";"):
                    while True:
                        d = self.declarator(spec, fstart, allow_abstract=False)
                        if self.accept(":"):
                            d.bitfield = self.conditional()
                            d.span = self.span(fstart)
                        decls.append(d)
                        if not self.accept(","):
                            break
                self.expect(";")
                fields_.append(Declaration(storage=(), type=spec, decls=decls, span=self.span(fstart)))
            self.expect("}")
        elif tag is None:
            raise self.error("anonymous record without body", {"{", "identifier"})
        self.skip_attributes()
        return RecordDecl(kind=first.text, tag=tag, fields=fields_, span=self.span(first))

    def enum_spec(self) -> EnumDecl:
        first = self.next()
        tag = self.next().text if self.peek().kind == "ident" else None
        items = None
        if self.accept("{"):
            items = []
            while not self.at("}"):
                name = self.expect_ident().text
                value = self.conditional() if self.accept("=") else None
                items.append((name, value))
                if not self.accept(","):
                    break
            self.expect("}")
        return EnumDecl(tag=tag, items=items, span=self.span(first))

    def pointers(self) -> int:
        n = 0
        while self.accept("*"):
            n += 1
            while self.peek().kind == "keyword" and self.peek().text in QUALIFIERS:
                self.next()
        return n

    def declarator(self, spec: TypeSpec, first: Token, allow_abstract: bool) -> VarDecl:
        """Parse one declarator; the returned node's span starts at ``first``."""
        ptrs = self.pointers()
        name = None
        fnptr = None
        variadic = False
        if self.at("(") and self.peek(1).is_punct("*"):
            self.next()
            self.next()
            if self.peek().kind == "ident":
                name = self.next().text
            self.expect(")")
            self.expect("(")
            fnptr, variadic = self.param_list()
        elif self.peek().kind == "ident":
            name = self.next().text
        elif not allow_abstract:
            raise self.error(f"unexpected {self.peek().text or self.peek().kind!r}", {"identifier"})
        dims = []
        while self.accept("["):
            dims.append(None if self.at("]") else self.assignment())
            self.expect("]")
        self.skip_attributes()
        return VarDecl(name=name, type=spec, pointers=ptrs, array_dims=dims,
                       fnptr_params=fnptr, fnptr_variadic=variadic, span=self.span(first))

    def param_list(self) -> tuple[list[VarDecl], bool]:
        params: list[VarDecl] = []
        variadic = False
        if self.at("void") and self.peek(1).is_punct(")"):
            self.next()
            self.next()
            return params, False
        if self.accept(")"):
            return params, False
        while True:
            if self.accept("..."):
                variadic = True
                break
            pstart = self.peek()
            _, spec = self.decl_specifiers()
            params.append(self.declarator(spec, pstart, allow_abstract=True))
            if not self.accept(","):
                break
        self.expect(")")
        return params, variadic

    def declaration(self, top_level: bool) -> Node:
        first = self.peek()
        storage, spec = self.decl_specifiers()
        if self.accept(";"):
            span = self.span(first)
            if spec.record is not None and not storage:
                spec.record.span = spec.record.span
                return _with_span(spec.record, span) if top_level else DeclStmt(
                    decl=Declaration(storage=storage, type=spec, span=span), span=span)
            if spec.enum is not None and not storage:
                return _with_span(spec.enum, span) if top_level else DeclStmt(
                    decl=Declaration(storage=storage, type=spec, span=span), span=span)
            decl = Declaration(storage=storage, type=spec, span=span)
            return decl if top_level else DeclStmt(decl=decl, span=span)

        ptrs = self.pointers()
        # function definition or prototype
        if top_level and self.peek().kind == "ident" and self.peek(1).is_punct("("):
            name_tok = self.next()
            self.next()
            params, variadic = self.param_list()
            self.skip_attributes()
            if self.at("{"):
                body = self.block()
                return FunctionDef(name=name_tok.text, ret=spec, ret_pointers=ptrs, params=params,
                                   variadic=variadic, storage=storage, body=body, span=self.span(first))
            self.expect(";")
            return FunctionDef(name=name_tok.text, ret=spec, ret_pointers=ptrs, params=params,
                               variadic=variadic, storage=storage, body=None, span=self.span(first))

        decls = []
        pending_ptrs = ptrs
        while True:
            d = self.declarator(spec, first, allow_abstract=False)
            d.pointers += pending_ptrs
            pending_ptrs = 0
            if self.accept("="):
                d.init = self.initializer()
                d.span = self.span(first)
            decls.append(d)
            if not self.accept(","):
                break
        self.expect(";")
        span = self.span(first)
        if "typedef" in storage:
            for d in decls:
                if d.name:
                    self.typedefs.add(d.name)
            td = Typedef(type=spec, decls=decls, span=span)
            return td if top_level else DeclStmt(decl=Declaration(storage=storage, type=spec, decls=decls, span=span), span=span)
        decl = Declaration(storage=storage, type=spec, decls=decls, span=span)
        return decl if top_level else DeclStmt(decl=decl, span=span)

    def initializer(self):
        if self.at("{"):
            first = self.next()
            items = []
            while not self.at("}"):
                items.append(self.initializer())
                if not self.accept(","):
                    break
            self.expect("}")
            return InitList(items=items, span=self.span(first))
        return self.assignment()

    # -- statements --------------------------------------------------------
    def block(self) -> Block:
        first = self.expect("{")
        items = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.error("unexpected end of input", {"}"})
            items.append(self.block_item())
        self.expect("}")
        return Block(items=items, span=self.span(first))

    def block_item(self) -> Node:
        start = self.pos
        typedefs = set(self.typedefs)
        try:
            if self.looks_like_declaration():
                return self.declaration(top_level=False)
            return self.statement()
        except ParseError:
            self.pos = start
            self.typedefs = typedefs
            return self.opaque_statement()

    def opaque_statement(self) -> Opaque:
        """Swallow one statement the grammar does not cover."""
        first = self.peek()
        if first.kind == "eof" or first.is_punct("}"):
            raise self.error("unexpected token", {"statement"})
        depth = 0
        tok = first
        while True:
            if depth == 0 and self.peek().is_punct("}") and self.pos > 0 and self.peek() is not first:
                # elided tail of a block, e.g. "......" before the closing brace
                break
            tok = self.next()
            if tok.kind == "eof":
                raise ParseError("unterminated statement", first.line, first.column, {";"})
            if tok.is_punct("(", "[", "{"):
                depth += 1
            elif tok.is_punct(")", "]", "}"):
                depth -= 1
                if depth == 0 and tok.text == "}" and not self.peek().is_punct(";", ","):
                    break
                if depth < 0:
                    raise ParseError("unbalanced statement", first.line, first.column, {";"})
            elif tok.is_punct(";") and depth == 0:
                break
        return Opaque(text=self.raw(first, tok), span=self.span(first, tok))

    def statement(self) -> Node:
        tok = self.peek()
        if tok.kind in ("include", "define", "opaque"):
            return self.directive_node(self.next())
        if tok.is_punct("{"):
            return self.block()
        if tok.kind == "keyword":
            kw = tok.text
            if kw == "if":
                self.next()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                then = self.statement_or_decl()
                orelse = self.statement_or_decl() if self.accept("else") else None
                return If(cond=cond, then=then, orelse=orelse, span=self.span(tok))
            if kw == "while":
                self.next()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                return While(cond=cond, body=self.statement_or_decl(), span=self.span(tok))
            if kw == "do":
                self.next()
                body = self.statement_or_decl()
                self.expect("while")
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                self.expect(";")
                return DoWhile(body=body, cond=cond, span=self.span(tok))
            if kw == "for":
                self.next()
                self.expect("(")
                if self.accept(";"):
                    init = None
                elif self.looks_like_declaration():
                    init = self.declaration(top_level=False)
                else:
                    istart = self.peek()
                    e = self.expression()
                    self.expect(";")
                    init = ExprStmt(expr=e, span=self.span(istart))
                cond = None if self.at(";") else self.expression()
                self.expect(";")
                step = None if self.at(")") else self.expression()
                self.expect(")")
                return For(init=init, cond=cond, step=step, body=self.statement_or_decl(), span=self.span(tok))
            if kw == "return":
                self.next()
                value = None if self.at(";") else self.expression()
                self.expect(";")
                return Return(value=value, span=self.span(tok))
            if kw == "break":
                self.next()
                self.expect(";")
                return Break(span=self.span(tok))
            if kw == "continue":
                self.next()
                self.expect(";")
                return Continue(span=self.span(tok))
            if kw == "goto":
                self.next()
                label = self.expect_ident().text
                self.expect(";")
                return Goto(label=label, span=self.span(tok))
            if kw == "switch":
                self.next()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                return Switch(cond=cond, body=self.statement_or_decl(), span=self.span(tok))
            if kw in ("case", "default"):
                self.next()
                value = self.conditional() if kw == "case" else None
                self.expect(":")
                if self.at("}"):
                    stmt = ExprStmt(expr=None, span=self.span(tok))
                else:
                    stmt = self.statement_or_decl()
                return Case(value=value, stmt=stmt, span=self.span(tok))
        if tok.kind == "ident" and self.peek(1).is_punct(":"):
            self.next()
            self.next()
            stmt = ExprStmt(expr=None, span=self.span(tok)) if self.at("}") else self.statement_or_decl()
            return Label(name=tok.text, stmt=stmt, span=self.span(tok))
        if self.accept(";"):
            return ExprStmt(expr=None, span=self.span(tok))
        expr = self.expression()
        self.expect(";")
        return ExprStmt(expr=expr, span=self.span(tok))

    def statement_or_decl(self) -> Node:
        return self.block_item()

    # -- expressions -------------------------------------------------------
    def expression(self):
        first = self.peek()
        expr = self.assignment()
        while self.accept(","):
            rhs = self.assignment()
            expr = BinaryOp(op=",", left=expr, right=rhs, span=self.span(first))
        return expr

    def assignment(self):
        first = self.peek()
        lhs = self.conditional()
        tok = self.peek()
        if tok.kind == "punct" and tok.text in ASSIGNMENT:
            self.next()
            rhs = self.assignment()
            return BinaryOp(op=tok.text, left=lhs, right=rhs, span=self.span(first))
        return lhs

    def conditional(self):
        first = self.peek()
        cond = self.binary(1)
        if self.accept("?"):
            then = self.expression()
            self.expect(":")
            orelse = self.conditional()
            return Conditional(cond=cond, then=then, orelse=orelse, span=self.span(first))
        return cond

    def binary(self, min_prec: int):
        first = self.peek()
        left = self.unary()
        while True:
            tok = self.peek()
            prec = BINARY_PRECEDENCE.get(tok.text) if tok.kind == "punct" else None
            if prec is None or prec < min_prec:
                return left
            self.next()
            right = self.binary(prec + 1)
            left = BinaryOp(op=tok.text, left=left, right=right, span=self.span(first))

    def is_type_name_start(self, k: int = 0) -> bool:
        tok = self.peek(k)
        if tok.kind == "keyword":
            return tok.text in BASE_TYPE_WORDS or tok.text in QUALIFIERS or tok.text in ("struct", "union", "enum")
        if tok.kind == "ident" and tok.text in self.typedefs:
            return True
        if tok.kind == "ident":
            nxt = self.peek(k + 1)
            return nxt.is_punct("*") and self.peek(k + 2).is_punct(")", "*") and (
                tok.text.endswith("_t") or tok.text[:1].isupper())
        return False

    def type_name(self) -> TypeName:
        first = self.peek()
        _, spec = self.decl_specifiers()
        ptrs = self.pointers()
        dims = []
        while self.accept("["):
            dims.append(None if self.at("]") else self.assignment())
            self.expect("]")
        return TypeName(spec=spec, pointers=ptrs, array_dims=dims, span=self.span(first))

    def unary(self):
        tok = self.peek()
        if tok.kind == "punct" and tok.text in ("&", "*", "!", "-", "+", "~"):
            self.next()
            operand = self.unary()
            return UnaryOp(op=tok.text, operand=operand, span=self.span(tok))
        if tok.kind == "punct" and tok.text in ("++", "--"):
            self.next()
            operand = self.unary()
            return UnaryOp(op=tok.text, operand=operand, span=self.span(tok))
        if tok.kind == "keyword" and tok.text == "sizeof":
            self.next()
            if self.at("(") and self.is_type_name_start(1):
                self.next()
                tn = self.type_name()
                self.expect(")")
                return SizeOf(arg=tn, span=self.span(tok))
            return SizeOf(arg=self.unary(), span=self.span(tok))
        if tok.is_punct("(") and self.is_type_name_start(1):
            self.next()
            tn = self.type_name()
            self.expect(")")
            if self.at("{"):
                raise self.error("compound literals are not supported")
            operand = self.unary()
            return Cast(type=tn, expr=operand, span=self.span(tok))
        return self.postfix()

    def postfix(self):
        first = self.peek()
        expr = self.primary()
        while True:
            if self.accept("("):
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.assignment())
                        if not self.accept(","):
                            break
                self.expect(")")
                expr = Call(func=expr, args=args, span=self.span(first))
            elif self.accept("["):
                idx = self.expression()
                self.expect("]")
                expr = Index(base=expr, index=idx, span=self.span(first))
            elif self.at(".", "->"):
                arrow = self.next().text == "->"
                name = self.expect_ident().text
                expr = Member(obj=expr, name=name, arrow=arrow, span=self.span(first))
            elif self.at("++", "--"):
                op = self.next().text
                expr = UnaryOp(op=op, operand=expr, postfix=True, span=self.span(first))
            else:
                return expr

    def primary(self):
        tok = self.peek()
        if tok.kind == "ident":
            self.next()
            return Identifier(name=tok.text, span=self.span(tok, tok))
        if tok.kind == "int":
            self.next()
            return IntLiteral(value=tok.value, text=tok.text if tok.macro is None else str(tok.value),
                              macro=tok.macro, span=self.span(tok, tok))
        if tok.kind == "char":
            self.next()
            return IntLiteral(value=tok.value, text=tok.text, span=self.span(tok, tok))
        if tok.kind == "string":
            parts = []
            while self.peek().kind == "string":
                parts.append(self.next().text)
            return StringLiteral(parts=tuple(parts), span=self.span(tok))
        if tok.is_punct("("):
            self.next()
            expr = self.expression()
            self.expect(")")
            # parentheses are not kept as nodes; widen the span to cover them
            return _with_span(expr, self.span(tok))
        raise self.error(f"unexpected {tok.text or tok.kind!r}", {"expression"})


def _is_base_word(word: str) -> bool:
    return word in BASE_TYPE_WORDS


def _with_span(node: Node, span: SourceSpan) -> Node:
    node.span = span
    return node


def parse_unit(source: bytes | str, file_id: str = "<memory>", max_bytes: int = MAX_SOURCE_BYTES) -> TranslationUnit:
    """Parse a whole C file.

    Raises :class:`ParseError` on the first unrecoverable error; statements
    inside function bodies that the grammar does not cover are kept as
    :class:`Opaque` nodes instead.
    """
    if isinstance(source, str):
        source = source.encode("utf-8")
    if len(source) > max_bytes:
        raise ParseError(f"source exceeds {max_bytes} bytes", 1, 1)
    try:
        text = source.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"invalid UTF-8 at byte {exc.start}", 1, 1) from exc
    try:
        tokens = preprocess(tokenize(text))
    except LexError as exc:
        raise ParseError(str(exc).split(": ", 1)[-1], exc.line, exc.column) from exc
    return _Parser(tokens, source, file_id).parse_unit()


def find_function(unit: TranslationUnit, name: str) -> FunctionDef:
    """Return the unique definition (with a body) of ``name``."""
    found = [f for f in unit.functions() if f.name == name]
    if not found:
        raise NotFound(name)
    if len(found) > 1:
        raise DuplicateDefinition(name)
    return found[0]
