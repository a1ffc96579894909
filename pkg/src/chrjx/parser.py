"""Parser for the CHR dialect: programs, queries and annotated stores.

Grammar (Prolog-flavoured)::

    program  := clause*
    clause   := [name '@'] head ('<=>' | '==>') [guard '|'] body '.'
    head     := goals ['\\' goals]
    goals    := goal (',' goal)*
    goal     := expr [relop expr]

Lowercase identifiers are atoms/functors, uppercase or ``_``-prefixed ones
are variables; ``%`` starts a comment running to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .builtins import WHITELIST
from .terms import (
    BUILTIN,
    RESERVED_SYMBOLS,
    USER,
    Atom,
    Compound,
    Constraint,
    Int,
    JustifiedConstraint,
    Program,
    Rule,
    Store,
    Term,
    Var,
)

RELOPS = ("=:=", "=\\=", "=<", ">=", "<", ">", "=", "is")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    start: int
    end: int

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


class ParseError(ValueError):
    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        self.span = span
        super().__init__(f"{message} at {span}" if span else message)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<op><=>|==>|=:=|=\\=|=<|>=|\#\#|[<>=+\-*\\|@,.()\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span = SourceSpan(line, pos - line_start + 1, pos, pos + 1)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        val = m.group(kind)
        span = SourceSpan(line, pos - line_start + 1, pos, m.end())
        if kind != "ws":
            if kind == "atom" and val == "is":
                kind = "op"
            tokens.append(Token(kind, val, span))
        nl = val.count("\n")
        if nl:
            line += nl
            line_start = pos + val.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(line, pos - line_start + 1, pos, pos)))
    return tokens


class _Parser:
    def __init__(self, text: str, var_counter: Optional[List[int]] = None):
        self.toks = tokenize(text)
        self.i = 0
        self.vars: Dict[str, Var] = {}
        # shared so that variables of different clauses get distinct ids
        self.var_counter = var_counter if var_counter is not None else [0]

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, n: int = 1) -> Token:
        return self.toks[min(self.i + n, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "atom") and self.tok.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def error(self, msg: str):
        raise ParseError(msg, self.tok.span)

    def new_var(self, name: str) -> Var:
        self.var_counter[0] += 1
        return Var(name, self.var_counter[0])

    def variable(self, name: str) -> Var:
        if name == "_":
            return self.new_var(name)
        if name not in self.vars:
            self.vars[name] = self.new_var(name)
        return self.vars[name]

    # expressions

    def expr(self) -> Term:
        t = self.mul_expr()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            t = Compound(op, (t, self.mul_expr()))
        return t

    def mul_expr(self) -> Term:
        t = self.primary()
        while self.at("*"):
            self.advance()
            t = Compound("*", (t, self.primary()))
        return t

    def primary(self) -> Term:
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return Int(int(tok.text))
        if tok.kind == "var":
            self.advance()
            return self.variable(tok.text)
        if tok.kind == "atom":
            self.advance()
            if self.at("("):
                self.advance()
                args = [self.expr()]
                while self.at(","):
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                return Compound(tok.text, tuple(args))
            return Atom(tok.text)
        if self.at("-"):
            self.advance()
            if self.tok.kind == "int":
                return Int(-int(self.advance().text))
            return Compound("-", (self.primary(),))
        if self.at("("):
            self.advance()
            t = self.expr()
            self.expect(")")
            return t
        self.error(f"unexpected {tok.text or 'end of input'!r}")

    # goals

    def goal(self) -> Constraint:
        start = self.tok
        lhs = self.expr()
        if self.tok.kind == "op" and self.tok.text in RELOPS:
            op = self.advance().text
            rhs = self.expr()
            return Constraint(op, (lhs, rhs), BUILTIN)
        if isinstance(lhs, Atom):
            if lhs.name in ("true", "false"):
                return Constraint(lhs.name, (), BUILTIN)
            return Constraint(lhs.name, (), USER)
        if isinstance(lhs, Compound) and lhs.functor not in ("+", "-", "*"):
            return Constraint(lhs.functor, lhs.args, USER)
        raise ParseError(f"not a constraint: {lhs}", start.span)

    def goals(self) -> List[Tuple[Constraint, SourceSpan]]:
        out = []
        while True:
            span = self.tok.span
            out.append((self.goal(), span))
            if not self.at(","):
                return out
            self.advance()

    # clauses

    def clause(self) -> Rule:
        self.vars = {}
        name = None
        if self.tok.kind == "atom" and self.peek().text == "@":
            name = self.advance().text
            self.advance()
        kept = self.goals()
        removed = []
        if self.at("\\"):
            self.advance()
            removed = self.goals()
        if self.at("<=>"):
            self.advance()
            if not removed:
                kept, removed = [], kept
        elif self.at("==>"):
            self.advance()
            if removed:
                self.error("propagation rule cannot have removed head constraints")
        else:
            self.error("expected '<=>' or '==>'")
        first = self.goals()
        if self.at("|"):
            self.advance()
            guard, body = first, self.goals()
        else:
            guard, body = [], first
        self.expect(".")
        for c, span in kept + removed:
            self.check_user(c, span, "head")
        for c, span in guard:
            if c.kind != BUILTIN:
                raise ParseError(f"user constraint {c} in guard", span)
        for c, span in body:
            if c.kind == BUILTIN and c.symbol not in ("true", "false"):
                raise ParseError(f"built-in {c.symbol} in rule body", span)
            if c.kind == USER:
                self.check_user(c, span, "body")
        return Rule(
            name,
            tuple(c for c, _ in kept),
            tuple(c for c, _ in removed),
            tuple(c for c, _ in guard if c.symbol != "true"),
            tuple(c for c, _ in body if c.symbol != "true"),
        )

    def check_user(self, c: Constraint, span: SourceSpan, where: str):
        if c.kind != USER:
            if c.symbol not in WHITELIST:
                raise ParseError(f"unknown built-in {c.symbol}", span)
            raise ParseError(f"built-in {c} in rule {where}", span)
        if c.symbol in RESERVED_SYMBOLS:
            raise ParseError(f"reserved constraint symbol {c.symbol}", span)


def parse_program(text: str) -> Program:
    p = _Parser(text)
    rules = []
    names = set()
    while p.tok.kind != "eof":
        span = p.tok.span
        r = p.clause()
        if r.name is not None:
            if r.name in names:
                raise ParseError(f"duplicate rule name {r.name}", span)
            names.add(r.name)
        rules.append(r)
    return Program(tuple(rules))


def parse_query(text: str) -> List[Constraint]:
    p = _Parser(text)
    if p.tok.kind == "eof":
        return []
    goals = p.goals()
    if p.at("."):
        p.advance()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    out = []
    for c, span in goals:
        if c.kind != USER:
            raise ParseError(f"built-in {c} not allowed in a query", span)
        if c.symbol in RESERVED_SYMBOLS:
            raise ParseError(f"reserved constraint symbol {c.symbol}", span)
        out.append(c)
    return out


def parse_constraint(text: str) -> Constraint:
    goals = parse_query(text)
    if len(goals) != 1:
        raise ParseError(f"expected exactly one constraint, got {len(goals)}")
    return goals[0]


def _just_list(p: _Parser, names: Dict[str, int]) -> Tuple[int, ...]:
    p.expect("##")
    p.expect("[")
    out = []
    while not p.at("]"):
        tok = p.advance()
        if tok.kind == "var":
            out.append(names.setdefault(tok.text, len(names)))
        else:
            raise ParseError(f"bad justification {tok.text!r}", tok.span)
        if p.at(","):
            p.advance()
    p.expect("]")
    return tuple(sorted(set(out)))


def _annotated(p: _Parser) -> Constraint:
    c = p.goal()
    if c.kind != USER:
        p.error(f"expected a user constraint, found {c}")
    return c


def parse_store(text: str) -> Store:
    """Build a store from answer text such as ``rem(min(1)##[A])##[A,B], min(0)##[B].``

    Justification letters are numbered by first appearance. The answers
    ``true.`` and ``false.`` give an empty and a failed store.
    """
    bare = text.strip().rstrip(".").strip()
    if bare in ("true", "false"):
        return Store(failed=() if bare == "false" else None)
    p = _Parser(text)
    names: Dict[str, int] = {}
    store = Store()
    items = []
    while p.tok.kind != "eof":
        if p.tok.text == "rem" and p.peek().text == "(":
            p.advance()
            p.expect("(")
            c = _annotated(p)
            inner = _just_list(p, names)
            p.expect(")")
            items.append(("rem", c, inner, _just_list(p, names)))
        else:
            c = _annotated(p)
            items.append(("live", c, _just_list(p, names), None))
        if p.at(","):
            p.advance()
        elif p.at("."):
            p.advance()
            break
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    for kind, c, inner, outer in items:
        if kind == "live":
            store.add_live(c, inner)
        else:
            sid = store.fresh_store_id()
            store.add_rem(JustifiedConstraint(c, inner, sid, sid), outer)
    store.next_just_id = max(store.justifications(), default=-1) + 1
    return store
