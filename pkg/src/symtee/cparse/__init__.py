"""C-subset front end: lexer, parser, AST and pretty-printer."""

from .nodes import *  # noqa: F401,F403
from .nodes import SourceSpan, TranslationUnit, walk, children
from .parser import DuplicateDefinition, NotFound, ParseError, find_function, parse_unit
from .printer import pretty_print

__all__ = [
    "SourceSpan", "TranslationUnit", "walk", "children", "ParseError", "NotFound",
    "DuplicateDefinition", "find_function", "parse_unit", "pretty_print",
]
