"""Tokenizer and the small preprocessor the parser relies on."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .nodes import SourceSpan

KEYWORDS = frozenset("""
auto break case char const continue default do double else enum extern float for
goto if inline int long register restrict return short signed sizeof static struct
switch typedef union unsigned void volatile while _Bool __inline __inline__
""".split())

PUNCTUATORS = sorted("""
... <<= >>= -> ++ -- << >> <= >= == != && || *= /= %= += -= &= ^= |=
[ ] ( ) { } . & * + - ~ ! / % < > ^ | ? : ; = , #
""".split(), key=len, reverse=True)

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+|\\\n)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<num>0[xX][0-9A-Fa-f]+[uUlL]*|[0-9]+[uUlL]*)
  | (?P<char>'(?:\\.|[^\\'\n])+')
  | (?P<string>"(?:\\.|[^\\"\n])*")
  | (?P<punct>""" + "|".join(re.escape(p) for p in PUNCTUATORS) + r""")
""", re.VERBOSE | re.DOTALL)

_DIRECTIVE_RE = re.compile(r"[ \t]*#(?:[^\n\\]|\\.|\\\n)*", re.DOTALL)
_DEFINE_INT_RE = re.compile(
    r"#\s*define\s+([A-Za-z_]\w*)\s+\(?\s*(0[xX][0-9A-Fa-f]+|[0-9]+)([uUlL]*)\s*\)?\s*(?://[^\n]*|/\*.*?\*/)?\s*$",
    re.DOTALL)

_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34, "a": 7,
            "b": 8, "f": 12, "v": 11, "?": 63}


class LexError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


@dataclass
class Token:
    kind: str  # ident keyword int char string punct include define opaque eof
    text: str
    start: int  # byte offsets
    end: int
    line: int
    end_line: int
    column: int
    value: Optional[int] = None
    macro: Optional[str] = None
    name: Optional[str] = None  # for define tokens

    def is_punct(self, *texts: str) -> bool:
        return self.kind == "punct" and self.text in texts


def parse_int(text: str) -> int:
    digits = text.rstrip("uUlL")
    if digits.lower().startswith("0x"):
        return int(digits, 16)
    if len(digits) > 1 and digits.startswith("0"):
        return int(digits, 8)
    return int(digits)


def char_value(text: str) -> int:
    body = text[1:-1]
    if body.startswith("\\"):
        esc = body[1:]
        if esc.startswith("x"):
            return int(esc[1:], 16)
        if esc and esc[0] in "01234567" and len(esc) > 1:
            return int(esc, 8)
        return _ESCAPES.get(esc, ord(esc[0]))
    return ord(body[0])


class _Positions:
    """Maps character offsets of the decoded text to byte offsets and lines."""

    def __init__(self, text: str):
        self.ascii = text.isascii()
        if not self.ascii:
            self.byte_at = [0] * (len(text) + 1)
            acc = 0
            for i, ch in enumerate(text):
                self.byte_at[i] = acc
                acc += len(ch.encode("utf-8"))
            self.byte_at[len(text)] = acc
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def byte(self, i: int) -> int:
        return i if self.ascii else self.byte_at[i]

    def line_col(self, i: int) -> tuple[int, int]:
        lo, hi = 0, len(self.line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.line_starts[mid] <= i:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, i - self.line_starts[lo] + 1


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into raw tokens; directives become single tokens."""
    pos = _Positions(text)
    tokens: list[Token] = []
    i = 0
    at_line_start = True
    n = len(text)

    def make(kind: str, a: int, b: int, **kw) -> Token:
        line, col = pos.line_col(a)
        end_line, _ = pos.line_col(max(a, b - 1))
        return Token(kind, text[a:b], pos.byte(a), pos.byte(b), line, end_line, col, **kw)

    while i < n:
        if at_line_start:
            m = _DIRECTIVE_RE.match(text, i)
            if m:
                a = i + (len(m.group(0)) - len(m.group(0).lstrip(" \t")))
                tokens.append(make("directive", a, m.end()))
                i = m.end()
                continue
        m = _TOKEN_RE.match(text, i)
        if m is None:
            line, col = pos.line_col(i)
            raise LexError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            at_line_start = True
        elif kind == "ws" or kind == "comment":
            if kind == "comment" and "\n" in m.group(0):
                at_line_start = False
        else:
            at_line_start = False
            a, b = m.start(), m.end()
            if kind == "ident":
                tokens.append(make("keyword" if m.group(0) in KEYWORDS else "ident", a, b))
            elif kind == "num":
                tokens.append(make("int", a, b, value=parse_int(m.group(0))))
            elif kind == "char":
                tokens.append(make("char", a, b, value=char_value(m.group(0))))
            else:
                tokens.append(make(kind, a, b))
        i = m.end()
    return tokens


def preprocess(tokens: list[Token]) -> list[Token]:
    """Classify directives and expand object-like integer macros.

    ``#include`` and ``#define NAME <int>`` survive as their own token kinds.
    A conditional block (``#if`` .. ``#endif``) collapses into one opaque
    token, as does every other directive.
    """
    out: list[Token] = []
    macros: dict[str, int] = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.kind != "directive":
            if tok.kind == "ident" and tok.text in macros:
                out.append(Token("int", tok.text, tok.start, tok.end, tok.line, tok.end_line,
                                 tok.column, value=macros[tok.text], macro=tok.text))
            else:
                out.append(tok)
            i += 1
            continue
        word = _directive_word(tok.text)
        if word == "include":
            tok.kind = "include"
            out.append(tok)
        elif word == "define" and (m := _DEFINE_INT_RE.match(tok.text.strip())):
            tok.kind = "define"
            tok.name = m.group(1)
            tok.value = parse_int(m.group(2))
            macros[tok.name] = tok.value
            out.append(tok)
        elif word in ("if", "ifdef", "ifndef"):
            depth = 0
            j = i
            while j < len(tokens):
                w = _directive_word(tokens[j].text) if tokens[j].kind == "directive" else None
                if w in ("if", "ifdef", "ifndef"):
                    depth += 1
                elif w == "endif":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            last = tokens[min(j, len(tokens) - 1)]
            out.append(Token("opaque", "", tok.start, last.end, tok.line, last.end_line, tok.column))
            i = j + 1
            continue
        else:
            tok.kind = "opaque"
            out.append(tok)
        i += 1
    return out


def _directive_word(text: str) -> str:
    m = re.match(r"\s*#\s*([A-Za-z_]*)", text)
    return m.group(1) if m else ""
