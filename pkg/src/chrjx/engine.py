"""Execution of translated programs over a justified constraint store.

Strategy: when no rule applies, the next pending query constraint becomes
live; rules are tried in textual order and, within a rule, head matches are
enumerated in ascending store_id order. The first match whose guard holds
(and, for propagation rules, has not fired before) is applied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .builtins import COMPARISONS, Binding, Failure, Inapplicable, Success, eval_builtin
from .terms import (
    Compound,
    Constraint,
    JustificationSet,
    JustifiedConstraint,
    RemEntry,
    Store,
    Term,
    Var,
    union_just,
)
from .transform import JProgram, JRule

DEFAULT_STEP_LIMIT = 100_000


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # activate | fire | fail | kill | revive
    rule: Optional[str] = None
    rule_index: Optional[int] = None
    matched: Tuple[JustifiedConstraint, ...] = ()
    removed: Tuple[int, ...] = ()
    added: Tuple[JustifiedConstraint, ...] = ()
    remembered: Tuple[RemEntry, ...] = ()
    just: JustificationSet = ()

    def to_record(self) -> dict:
        rec = {"event": self.kind}
        if self.rule is not None:
            rec["rule"] = self.rule
        if self.matched:
            rec["matched"] = [jc.store_id for jc in self.matched]
        if self.removed:
            rec["removed"] = list(self.removed)
        if self.added:
            rec["added"] = [
                {"id": jc.store_id, "constraint": str(jc.constraint), "just": list(jc.just)}
                for jc in self.added
            ]
        if self.remembered:
            rec["remembered"] = [
                {"id": e.store_id, "inner": e.inner.store_id, "outer": list(e.outer)}
                for e in self.remembered
            ]
        if self.just:
            rec["just"] = list(self.just)
        return rec


@dataclass
class Trace:
    events: List[TraceEvent] = field(default_factory=list)
    diagnostics: Dict[str, None] = field(default_factory=dict)

    def append(self, ev: TraceEvent):
        self.events.append(ev)

    def note(self, msg: str):
        self.diagnostics.setdefault(msg, None)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    def dumps(self) -> str:
        """One JSON record per line."""
        return "".join(json.dumps(ev.to_record()) + "\n" for ev in self.events)


class StepLimitExceeded(RuntimeError):
    def __init__(self, store: Store, trace: Trace, limit: int):
        self.store = store
        self.trace = trace
        self.limit = limit
        super().__init__(f"no final state after {limit} steps")


# matching


def match_term(pattern: Term, value: Term, b: Binding) -> bool:
    """One-way match of ``pattern`` against ``value``, extending ``b`` in place."""
    if isinstance(pattern, Var):
        bound = b.get(pattern.id)
        if bound is None:
            b[pattern.id] = value
            return True
        return bound == value
    if isinstance(pattern, Compound):
        if not isinstance(value, Compound) or value.functor != pattern.functor:
            return False
        if len(value.args) != len(pattern.args):
            return False
        return all(match_term(p, v, b) for p, v in zip(pattern.args, value.args))
    return pattern == value


def match_constraint(pattern: Constraint, c: Constraint, b: Binding) -> Optional[Binding]:
    if pattern.key != c.key:
        return None
    out = dict(b)
    for p, v in zip(pattern.args, c.args):
        if not match_term(p, v, out):
            return None
    return out


@lru_cache(maxsize=None)
def _guard_checkpoints(head: Tuple[Constraint, ...], guard: Tuple[Constraint, ...]):
    """Pure guard tests indexed by the head position after which they are decidable."""
    seen = set()
    bound_after = []
    for c in head:
        seen.update(v.id for v in c.vars())
        bound_after.append(set(seen))
    checks: Dict[int, List[Constraint]] = {}
    for g in guard:
        if g.symbol not in COMPARISONS:
            continue
        vs = {v.id for v in g.vars()}
        for i, bound in enumerate(bound_after):
            if vs <= bound:
                checks.setdefault(i, []).append(g)
                break
    return checks


def match_head(
    head: Sequence[Constraint],
    store: Store,
    guard: Sequence[Constraint] = (),
) -> Iterator[Tuple[Binding, Tuple[JustifiedConstraint, ...]]]:
    """Injective matches of ``head`` against live constraints, lexicographic in store_id.

    Guard comparisons whose variables are all bound by a head prefix are used
    to prune early; the full guard must still be checked by the caller.
    """
    head = tuple(head)
    checks = _guard_checkpoints(head, tuple(guard)) if guard else {}
    pools = [store.candidates(c.key) for c in head]
    chosen: List[JustifiedConstraint] = []
    used = set()

    def go(i: int, b: Binding):
        if i == len(head):
            yield b, tuple(chosen)
            return
        for jc in pools[i]:
            if jc.store_id in used:
                continue
            b2 = match_constraint(head[i], jc.constraint, b)
            if b2 is None:
                continue
            if any(isinstance(eval_builtin(g, b2), Failure) for g in checks.get(i, ())):
                continue
            chosen.append(jc)
            used.add(jc.store_id)
            yield from go(i + 1, b2)
            chosen.pop()
            used.discard(jc.store_id)

    return go(0, {})


def check_guard(
    guard: Sequence[Constraint], b: Binding, trace: Optional[Trace] = None
) -> Optional[Binding]:
    for g in guard:
        out = eval_builtin(g, b)
        if isinstance(out, Success):
            b = out.binding
        elif isinstance(out, Inapplicable):
            if trace is not None:
                trace.note(out.reason)
            return None
        else:
            return None
    return b


def instantiate(t: Term, b: Binding, store: Store, fresh: Dict[int, Var]) -> Term:
    if isinstance(t, Var):
        if t.id in b:
            return b[t.id]
        if t.id not in fresh:
            fresh[t.id] = store.fresh_var()
        return fresh[t.id]
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(instantiate(a, b, store, fresh) for a in t.args))
    return t


# transitions


def find_firing(
    store: Store, prog: JProgram, trace: Optional[Trace] = None
) -> Optional[Tuple[JRule, Binding, Tuple[JustifiedConstraint, ...]]]:
    for jr in prog.rules:
        for b, matched in match_head(jr.head, store, jr.guard):
            if jr.is_propagation and (jr.index, tuple(m.origin for m in matched)) in store.history:
                continue
            b2 = check_guard(jr.guard, b, trace)
            if b2 is not None:
                return jr, b2, matched
    return None


def apply_firing(
    store: Store, jr: JRule, b: Binding, matched: Tuple[JustifiedConstraint, ...]
) -> TraceEvent:
    just = union_just(m.just for m in matched)
    if jr.is_propagation:
        store.history.add((jr.index, tuple(m.origin for m in matched)))
    if jr.fails:
        store.failed = just
        return TraceEvent("fail", jr.name, jr.index, matched, just=just)
    rems = []
    for jc in matched[len(jr.kept):]:
        store.remove_live(jc.store_id)
        rems.append(store.add_rem(jc, just))
    fresh: Dict[int, Var] = {}
    added = []
    for c in jr.body:
        args = tuple(instantiate(a, b, store, fresh) for a in c.args)
        added.append(store.add_live(Constraint(c.symbol, args), just))
    return TraceEvent(
        "fire",
        jr.name,
        jr.index,
        matched,
        removed=tuple(jc.store_id for jc in matched[len(jr.kept):]),
        added=tuple(added),
        remembered=tuple(rems),
        just=just,
    )


def activate_next(store: Store) -> TraceEvent:
    q = store.pending.pop(0)
    jc = store.add_live(q.constraint, q.just)
    return TraceEvent("activate", added=(jc,), just=jc.just)


def step_inplace(store: Store, prog: JProgram, trace: Optional[Trace] = None) -> Optional[TraceEvent]:
    if store.failed is not None:
        return None
    firing = find_firing(store, prog, trace)
    if firing is not None:
        return apply_firing(store, *firing)
    if store.pending:
        return activate_next(store)
    return None


def step(store: Store, prog: JProgram) -> Optional[Tuple[Store, TraceEvent]]:
    """One transition on a copy of ``store``; ``None`` when the store is final."""
    s = store.copy()
    ev = step_inplace(s, prog)
    return None if ev is None else (s, ev)


def run_inplace(
    store: Store, prog: JProgram, limit: int = DEFAULT_STEP_LIMIT, trace: Optional[Trace] = None
) -> Trace:
    if limit <= 0:
        raise ValueError("step limit must be positive")
    trace = Trace() if trace is None else trace
    for _ in range(limit):
        ev = step_inplace(store, prog, trace)
        if ev is None:
            return trace
        trace.append(ev)
    if step_inplace(store.copy(), prog) is None:
        return trace
    raise StepLimitExceeded(store, trace, limit)


def run(store: Store, prog: JProgram, limit: int = DEFAULT_STEP_LIMIT) -> Tuple[Store, Trace]:
    """Run to a final state. Raises :class:`StepLimitExceeded` carrying the partial store."""
    s = store.copy()
    trace = run_inplace(s, prog, limit)
    return s, trace
