"""Translation of rules and queries to their justification-annotated form."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .terms import (
    BUILTIN,
    RESERVED_SYMBOLS,
    Constraint,
    JustificationSet,
    JustifiedConstraint,
    Program,
    Rule,
    Store,
)


class TranslationError(ValueError):
    pass


@dataclass(frozen=True)
class JRule:
    """A rule whose head constraints carry justification variables.

    ``head_just[i]`` names the justification set of ``rule.head[i]``; every
    emitted ``rem`` entry and body constraint is annotated with ``union_var``,
    the union of all of them.
    """

    rule: Rule
    index: int
    head_just: Tuple[str, ...]
    union_var: str
    rem: Tuple[Tuple[Constraint, str], ...]
    body: Tuple[Constraint, ...]
    fails: bool

    @property
    def name(self) -> str:
        return self.rule.name if self.rule.name is not None else f"rule{self.index}"

    @property
    def kept(self) -> Tuple[Constraint, ...]:
        return self.rule.kept

    @property
    def removed(self) -> Tuple[Constraint, ...]:
        return self.rule.removed

    @property
    def head(self) -> Tuple[Constraint, ...]:
        return self.rule.head

    @property
    def guard(self) -> Tuple[Constraint, ...]:
        return self.rule.guard

    @property
    def is_propagation(self) -> bool:
        return self.rule.is_propagation

    def body_annotations(self) -> set:
        """Head justification variables that the body annotation ``union_var`` unites."""
        return set(self.head_just)


@dataclass(frozen=True)
class JProgram:
    rules: Tuple[JRule, ...]
    source: Program

    def __len__(self) -> int:
        return len(self.rules)


def _fresh_names(rule: Rule, count: int) -> Tuple[List[str], str]:
    used = {v.name for c in rule.head + rule.guard + rule.body for v in c.vars()}
    prefix = "F"
    while any(n.startswith(prefix) for n in used):
        prefix = "_" + prefix
    return [f"{prefix}{i + 1}" for i in range(count)], f"{prefix}s"


def translate_rule(r: Rule, index: int = 0) -> JRule:
    for c in r.head + r.body:
        if c.symbol in RESERVED_SYMBOLS:
            raise TranslationError(f"reserved constraint symbol {c.symbol} in rule {r.name or index}")
    head_just, union_var = _fresh_names(r, len(r.head))
    removed_just = head_just[len(r.kept):]
    return JRule(
        rule=r,
        index=index,
        head_just=tuple(head_just),
        union_var=union_var,
        rem=tuple(zip(r.removed, removed_just)),
        body=tuple(c for c in r.body if c.kind != BUILTIN),
        fails=r.fails,
    )


def translate_program(p: Program) -> JProgram:
    seen = set()
    for r in p.rules:
        if r.name is not None:
            if r.name in seen:
                raise TranslationError(f"duplicate rule name {r.name}")
            seen.add(r.name)
    return JProgram(tuple(translate_rule(r, i) for i, r in enumerate(p.rules)), p)


def annotate_query(
    goal: Sequence[Constraint], store: Optional[Store] = None
) -> Tuple[Store, List[Tuple[Constraint, int]]]:
    """Give every goal constraint a fresh singleton justification.

    The annotated constraints are queued on the store's ``pending`` list and
    become live one at a time when the store is run. Returns the new store
    and the (constraint, justification) pairs in goal order.
    """
    s = Store() if store is None else store.copy()
    mapping = []
    for c in goal:
        if c.symbol in RESERVED_SYMBOLS:
            raise TranslationError(f"reserved constraint symbol {c.symbol} in query")
        j = s.fresh_justification()
        s.pending.append(JustifiedConstraint(c, (j,), -1, -1))
        mapping.append((c, j))
    return s, mapping


def format_jrule(jr: JRule) -> str:
    """Render a translated rule in the ``##`` annotation syntax."""
    kept = [f"{c}##{f}" for c, f in zip(jr.kept, jr.head_just)]
    removed = [f"{c}##{f}" for c, f in zip(jr.removed, jr.head_just[len(jr.kept):])]
    if kept and removed:
        head = f"{', '.join(kept)} \\ {', '.join(removed)} <=>"
    elif removed:
        head = f"{', '.join(removed)} <=>"
    else:
        head = f"{', '.join(kept)} ==>"
    guard = ", ".join(str(c) for c in jr.guard) or "true"
    body = [f"union([{','.join(jr.head_just)}],{jr.union_var})"]
    body += [f"rem({c}##{f})##{jr.union_var}" for c, f in jr.rem]
    body += [f"{c}##{jr.union_var}" for c in jr.body]
    if jr.fails:
        body.append("false")
    prefix = f"{jr.rule.name} @ " if jr.rule.name is not None else ""
    return f"{prefix}{head} {guard} | {', '.join(body)}."


def format_jprogram(jp: JProgram) -> str:
    return "\n".join(format_jrule(r) for r in jp.rules)
