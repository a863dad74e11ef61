"""Boolean query language.

Grammar (operators case-insensitive, adjacency means AND)::

    or     := and ("OR" and)*
    and    := andnot (["AND"] andnot)*
    andnot := atom ("ANDNOT" atom)*
    atom   := TERM | "(" or ")"

Terms are normalized exactly as the indexer normalizes words.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from mose.errors import QueryParseError
from mose.index.text import normalize_term

MAX_DEPTH = 64


@dataclass(frozen=True)
class Term:
    text: str


@dataclass(frozen=True)
class And:
    left: "QueryAst"
    right: "QueryAst"


@dataclass(frozen=True)
class Or:
    left: "QueryAst"
    right: "QueryAst"


@dataclass(frozen=True)
class AndNot:
    left: "QueryAst"
    right: "QueryAst"


QueryAst = Union[Term, And, Or, AndNot]

_TOKEN = re.compile(r"[()]|[^\W_]+")
_OPERATORS = {"and": "AND", "or": "OR", "andnot": "ANDNOT"}


def _lex(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    for m in _TOKEN.finditer(text):
        word = m.group()
        if word in "()":
            tokens.append((word, word, m.start()))
        elif word.lower() in _OPERATORS:
            tokens.append((_OPERATORS[word.lower()], word, m.start()))
        else:
            tokens.append(("TERM", normalize_term(word), m.start()))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _lex(text)
        self.i = 0
        self.opens: list[int] = []

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)

    def parse(self) -> QueryAst:
        if not self.tokens:
            raise QueryParseError("empty query", 0)
        node = self.or_expr()
        if self.i < len(self.tokens):
            kind = self.peek()
            msg = "unbalanced ')'" if kind == ")" else f"unexpected {self.tokens[self.i][1]!r}"
            raise QueryParseError(msg, self.pos())
        return node

    def or_expr(self) -> QueryAst:
        node = self.and_expr()
        while self.peek() == "OR":
            self.i += 1
            node = Or(node, self.and_expr())
        return node

    def and_expr(self) -> QueryAst:
        node = self.andnot_expr()
        while self.peek() in ("AND", "TERM", "("):
            if self.peek() == "AND":
                self.i += 1
            node = And(node, self.andnot_expr())
        return node

    def andnot_expr(self) -> QueryAst:
        node = self.atom()
        while self.peek() == "ANDNOT":
            self.i += 1
            node = AndNot(node, self.atom())
        return node

    def atom(self) -> QueryAst:
        kind = self.peek()
        if kind == "TERM":
            node = Term(self.tokens[self.i][1])
            self.i += 1
            return node
        if kind == "(":
            open_at = self.pos()
            self.opens.append(open_at)
            if len(self.opens) > MAX_DEPTH:
                raise QueryParseError(f"query deeper than {MAX_DEPTH}", open_at)
            self.i += 1
            node = self.or_expr()
            self.opens.pop()
            if self.peek() != ")":
                raise QueryParseError("unbalanced '('", open_at)
            self.i += 1
            return node
        if kind is None:
            if self.opens:
                raise QueryParseError("unbalanced '('", self.opens[-1])
            raise QueryParseError("dangling operator at end of query", self.pos())
        if kind == ")":
            raise QueryParseError("unbalanced ')'", self.pos())
        raise QueryParseError(f"dangling operator {self.tokens[self.i][1]!r}", self.pos())


def depth(ast: QueryAst) -> int:
    """Height of the tree (a lone term has depth 1), computed without recursion."""
    best = 0
    stack = [(ast, 1)]
    while stack:
        node, d = stack.pop()
        best = max(best, d)
        if not isinstance(node, Term):
            stack.append((node.left, d + 1))
            stack.append((node.right, d + 1))
    return best


def parse_query(text: str) -> QueryAst:
    ast = _Parser(text).parse()
    if depth(ast) > MAX_DEPTH:
        raise QueryParseError(f"query deeper than {MAX_DEPTH}", 0)
    return ast


def to_text(ast: QueryAst) -> str:
    """Fully parenthesized query text that parses back to `ast`."""
    if isinstance(ast, Term):
        return ast.text
    op = {And: "AND", Or: "OR", AndNot: "ANDNOT"}[type(ast)]
    return f"({to_text(ast.left)} {op} {to_text(ast.right)})"
