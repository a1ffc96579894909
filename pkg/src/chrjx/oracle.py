"""Independent checks of conservativity, commutation of retraction, and correctness.

Three routes are used:

* a plain interpreter for untranslated programs (no justifications, no
  ``rem``), for the conservativity check;
* ``store_equiv``, multiset equality up to renaming of justifications and
  variables;
* witness replay: a computation with a killed justification is replayed
  without every transition that mentions it, checking that each replayed
  step is applicable and that the result is final. This realises the
  existential reading of the correctness result for programs whose final
  state depends on rule order.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .builtins import Binding
from .engine import (
    DEFAULT_STEP_LIMIT,
    StepLimitExceeded,
    Trace,
    check_guard,
    find_firing,
    instantiate,
    match_constraint,
    run_inplace,
)
from .printer import format_store
from .retraction import kill_inplace
from .terms import (
    Compound,
    Constraint,
    JustifiedConstraint,
    Program,
    RemEntry,
    Store,
    Term,
    Var,
)
from .transform import JProgram, annotate_query, translate_program


@dataclass
class EquivReport:
    verdict: bool
    witness: Optional[Tuple[str, str]] = None
    log: List[str] = field(default_factory=list)
    inconclusive: bool = False
    route: str = "direct"

    def __bool__(self) -> bool:
        return self.verdict and not self.inconclusive


def _inconclusive(msg: str) -> EquivReport:
    return EquivReport(False, None, [msg], inconclusive=True, route="none")


# strip


Item = Union[JustifiedConstraint, RemEntry]


def _strip_item(f: int, item: Item) -> Optional[Item]:
    if isinstance(item, RemEntry):
        if f in item.outer:
            return _strip_item(f, item.inner)
        return item
    return None if f in item.just else item


def strip(f: int, goal: Union[Store, Sequence[Item]]):
    """Erase every trace of justification ``f``.

    Remembered entries whose outer set mentions ``f`` collapse to their
    (stripped) inner constraint; constraints mentioning ``f`` vanish.
    Accepts a store (returns a new store) or a sequence of items.
    """
    if not isinstance(goal, Store):
        return [x for x in (_strip_item(f, i) for i in goal) if x is not None]
    out = Store(
        killed=set(goal.killed),
        history=set(goal.history),
        failed=goal.failed if goal.failed is None or f not in goal.failed else None,
        next_store_id=goal.next_store_id,
        next_just_id=goal.next_just_id,
        next_var_id=goal.next_var_id,
    )
    items = sorted(
        list(goal.live.values()) + list(goal.remembered.values()), key=lambda i: i.store_id
    )
    for item in items:
        s = _strip_item(f, item)
        if isinstance(s, RemEntry):
            out.remembered[s.store_id] = s
        elif s is not None:
            out.live[s.store_id] = s
    out.live = dict(sorted(out.live.items()))
    for sid, jc in out.live.items():
        out.by_key.setdefault(jc.constraint.key, {})[sid] = jc
    out.pending = [q for q in goal.pending if f not in q.just]
    return out


# equivalence


def _skeleton_term(t: Term):
    if isinstance(t, Var):
        return "?"
    if isinstance(t, Compound):
        return (t.functor, tuple(_skeleton_term(a) for a in t.args))
    return t


def _items(store: Store):
    out = []
    for jc in store.live.values():
        c = jc.constraint
        out.append((("L", c.symbol, tuple(_skeleton_term(a) for a in c.args), len(jc.just)), c, (jc.just,)))
    for e in store.remembered.values():
        c = e.inner.constraint
        sk = ("R", c.symbol, tuple(_skeleton_term(a) for a in c.args), len(e.inner.just), len(e.outer))
        out.append((sk, c, (e.inner.just, e.outer)))
    return out


def _colors(items) -> Dict[int, tuple]:
    occ: Dict[int, list] = {}
    for sk, _, sets in items:
        for role, js in enumerate(sets):
            for j in js:
                occ.setdefault(j, []).append((sk, role))
    return {j: tuple(sorted(v, key=repr)) for j, v in occ.items()}


def _vars_of(c: Constraint) -> List[int]:
    return [v.id for v in c.vars()]


def _extend_sets(a, b, fwd, bwd, col1, col2):
    """Yield (fwd, bwd) extensions mapping set ``a`` bijectively onto set ``b``."""
    todo_a = []
    for x in a:
        if x in fwd:
            if fwd[x] not in b:
                return
        else:
            todo_a.append(x)
    free_b = [y for y in b if y not in bwd]
    if len(free_b) != len(todo_a):
        return
    for perm in itertools.permutations(free_b):
        if any(col1[x] != col2[y] for x, y in zip(todo_a, perm)):
            continue
        f2, b2 = dict(fwd), dict(bwd)
        for x, y in zip(todo_a, perm):
            f2[x] = y
            b2[y] = x
        yield f2, b2


def _extend_vars(c1: Constraint, c2: Constraint, vf, vb):
    vf, vb = dict(vf), dict(vb)
    for x, y in zip(_vars_of(c1), _vars_of(c2)):
        if vf.get(x, y) != y or vb.get(y, x) != x:
            return None
        vf[x], vb[y] = y, x
    return vf, vb


def store_equiv(s1: Store, s2: Store) -> EquivReport:
    """Equal live and remembered multisets under a bijective renaming of justifications and variables."""
    witness = (format_store(s1), format_store(s2))
    if (s1.failed is None) != (s2.failed is None):
        return EquivReport(False, witness, ["exactly one store is failed"])
    i1, i2 = _items(s1), _items(s2)
    c1 = Counter(sk for sk, _, _ in i1)
    c2 = Counter(sk for sk, _, _ in i2)
    if c1 != c2:
        return EquivReport(False, witness, [f"shape mismatch: {dict(c1 - c2)} vs {dict(c2 - c1)}"])
    col1, col2 = _colors(i1), _colors(i2)
    if Counter(col1.values()) != Counter(col2.values()):
        return EquivReport(False, witness, ["justification usage patterns differ"])
    # rarest shapes first keeps the search narrow
    i1.sort(key=lambda it: (c1[it[0]], repr(it[0])))
    by_sk: Dict[tuple, list] = {}
    for idx, it in enumerate(i2):
        by_sk.setdefault(it[0], []).append(idx)
    log: List[str] = []
    budget = [200_000]

    def search(k, used, jf, jb, vf, vb) -> bool:
        if k == len(i1):
            return True
        budget[0] -= 1
        if budget[0] < 0:
            return False
        sk, con1, sets1 = i1[k]
        for idx in by_sk[sk]:
            if idx in used:
                continue
            _, con2, sets2 = i2[idx]
            # equal shapes, so a consistent variable bijection makes them equal
            vm = _extend_vars(con1, con2, vf, vb)
            if vm is None:
                continue
            for jf2, jb2 in _extend_all(sets1, sets2, jf, jb, col1, col2):
                if search(k + 1, used | {idx}, jf2, jb2, vm[0], vm[1]):
                    return True
        return False

    ok = search(0, frozenset(), {}, {}, {}, {})
    if budget[0] < 0:
        log.append("renaming search budget exhausted")
        return EquivReport(False, witness, log, inconclusive=True)
    if not ok:
        log.append("no renaming makes the stores equal")
        return EquivReport(False, witness, log)
    return EquivReport(True, None, log)


def _extend_all(sets1, sets2, jf, jb, col1, col2):
    if not sets1:
        yield jf, jb
        return
    for f2, b2 in _extend_sets(sets1[0], sets2[0], jf, jb, col1, col2):
        yield from _extend_all(sets1[1:], sets2[1:], f2, b2, col1, col2)


# plain interpreter for untranslated programs


@dataclass
class PlainResult:
    live: List[Constraint]
    failed: bool
    steps: int


def run_plain(
    prog: Program, goal: Sequence[Constraint], limit: int = DEFAULT_STEP_LIMIT
) -> PlainResult:
    """Run an untranslated program with the same strategy as the engine.

    Deliberately naive: matches are enumerated with ``itertools.permutations``
    over the whole live store.
    """
    live: Dict[int, Constraint] = {}
    pending = list(goal)
    history = set()
    next_id = 0
    scratch = Store()
    steps = 0
    while True:
        if steps >= limit:
            raise RuntimeError(f"plain run exceeded {limit} steps")
        fired = False
        for ri, rule in enumerate(prog.rules):
            head = rule.kept + rule.removed
            ids = list(live)
            for combo in itertools.permutations(ids, len(head)):
                b: Optional[Binding] = {}
                for pat, sid in zip(head, combo):
                    b = match_constraint(pat, live[sid], b)
                    if b is None:
                        break
                if b is None:
                    continue
                if not rule.removed and (ri, combo) in history:
                    continue
                b = check_guard(rule.guard, b)
                if b is None:
                    continue
                if not rule.removed:
                    history.add((ri, combo))
                if rule.fails:
                    return PlainResult(list(live.values()), True, steps + 1)
                for sid in combo[len(rule.kept):]:
                    del live[sid]
                fresh: Dict[int, Var] = {}
                for c in rule.body:
                    args = tuple(instantiate(a, b, scratch, fresh) for a in c.args)
                    live[next_id] = Constraint(c.symbol, args)
                    next_id += 1
                fired = True
                break
            if fired:
                break
        if not fired:
            if not pending:
                return PlainResult(list(live.values()), False, steps)
            live[next_id] = pending.pop(0)
            next_id += 1
        steps += 1


def _canonical(constraints: Sequence[Constraint]) -> Counter:
    names: Dict[int, str] = {}
    out = []
    for c in constraints:
        for v in c.vars():
            names.setdefault(v.id, f"V{len(names)}")
        out.append(str(_rename_named(c, names)))
    return Counter(out)


def _rename_named(c: Constraint, names: Dict[int, str]) -> Constraint:
    def rn(t):
        if isinstance(t, Var):
            return Var(names[t.id], 0)
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(rn(a) for a in t.args))
        return t

    return Constraint(c.symbol, tuple(rn(a) for a in c.args), c.kind)


def erase(store: Store) -> List[Constraint]:
    """Drop annotations and remembered entries."""
    return [jc.constraint for jc in store.live.values()]


def check_lemma1(
    prog: Program, query: Sequence[Constraint], limit: int = DEFAULT_STEP_LIMIT
) -> EquivReport:
    try:
        plain = run_plain(prog, query, limit)
        store, _ = annotate_query(query)
        run_inplace(store, translate_program(prog), limit)
    except (StepLimitExceeded, RuntimeError) as exc:
        return _inconclusive(str(exc))
    if plain.failed != (store.failed is not None):
        return EquivReport(False, ("failed" if plain.failed else "ok", format_store(store)), ["failure differs"])
    a, b = _canonical(plain.live), _canonical(erase(store))
    if a != b:
        return EquivReport(
            False,
            (", ".join(sorted(a.elements())), ", ".join(sorted(b.elements()))),
            ["erased translated store differs from the plain run"],
        )
    return EquivReport(True)


# witness replay


def replay_without(
    f: int, prog: JProgram, trace: Trace, final: Store
) -> EquivReport:
    """Replay ``trace`` skipping every transition that mentions ``f``.

    Succeeds when each replayed rule application is applicable in the replay
    state, the replay ends in a final state, and that state is equivalent to
    ``strip(f, final)``.
    """
    right = Store(next_just_id=final.next_just_id)
    by_origin: Dict[int, int] = {}
    log: List[str] = []
    for n, ev in enumerate(trace):
        if ev.kind in ("kill", "revive"):
            continue
        if f in ev.just:
            continue
        if ev.kind == "activate":
            jc = ev.added[0]
            by_origin[jc.origin] = right.add_live(jc.constraint, jc.just, jc.origin).store_id
            continue
        jr = prog.rules[ev.rule_index]
        mine = []
        for m in ev.matched:
            sid = by_origin.get(m.origin)
            if sid is None or sid not in right.live or right.live[sid].constraint != m.constraint:
                log.append(f"event {n}: head {m.constraint} not live in replay")
                return EquivReport(False, None, log, route="witness")
            mine.append(right.live[sid])
        b: Optional[Binding] = {}
        for pat, jc in zip(jr.head, mine):
            b = match_constraint(pat, jc.constraint, b)
            if b is None:
                break
        if b is None or check_guard(jr.guard, b) is None:
            log.append(f"event {n}: rule {jr.name} not applicable in replay")
            return EquivReport(False, None, log, route="witness")
        if jr.is_propagation:
            rec = (jr.index, tuple(m.origin for m in mine))
            if rec in right.history:
                log.append(f"event {n}: propagation {jr.name} fired twice")
                return EquivReport(False, None, log, route="witness")
            right.history.add(rec)
        if ev.kind == "fail":
            right.failed = ev.just
            continue
        for jc in mine[len(jr.kept):]:
            right.remove_live(jc.store_id)
            right.add_rem(jc, ev.just)
        for jc in ev.added:
            by_origin[jc.origin] = right.add_live(jc.constraint, jc.just, jc.origin).store_id
    if right.failed is None and find_firing(right, prog) is not None:
        log.append("replay does not end in a final state")
        return EquivReport(False, None, log, route="witness")
    rep = store_equiv(strip(f, final), right)
    rep.route = "witness"
    rep.log = log + rep.log
    return rep


# correctness and commutation


def _leftover(f: int, store: Store) -> Optional[EquivReport]:
    """A killed justification must not survive anywhere in the store."""
    bad = [str(jc.constraint) for jc in store.live.values() if f in jc.just]
    bad += [f"rem({e.inner.constraint})" for e in store.remembered.values() if f in e.outer or f in e.inner.just]
    if not bad:
        return None
    return EquivReport(False, (format_store(store), ", ".join(bad)), [f"justification {f} survives the kill"])


def check_theorem3(
    prog: Program,
    query: Sequence[Constraint],
    extra: Constraint,
    limit: int = DEFAULT_STEP_LIMIT,
) -> EquivReport:
    """Adding ``extra`` and then killing it is the same as never adding it."""
    jp = translate_program(prog)
    try:
        left, mapping = annotate_query(list(query) + [extra])
        trace = run_inplace(left, jp, limit)
        f = mapping[-1][1]
        kill_inplace(left, f, jp, limit, trace)
        right, _ = annotate_query(query)
        run_inplace(right, jp, limit)
    except StepLimitExceeded as exc:
        return _inconclusive(str(exc))
    bad = _leftover(f, left)
    if bad is not None:
        return bad
    rep = store_equiv(strip(f, left), right)
    if rep.verdict:
        return rep
    alt = replay_without(f, jp, trace, left)
    alt.log = rep.log + alt.log
    if not alt.verdict:
        alt.witness = rep.witness
    return alt


def check_theorem2(
    prog: Program,
    query: Sequence[Constraint],
    f: int,
    k: int,
    limit: int = DEFAULT_STEP_LIMIT,
) -> EquivReport:
    """Killing ``f`` after ``k`` transitions ends like killing it before any."""
    jp = translate_program(prog)
    try:
        early, _ = annotate_query(query)
        kill_inplace(early, f, jp, limit)
        late, _ = annotate_query(query)
        trace = run_inplace(late, jp, k) if k > 0 else Trace()
    except StepLimitExceeded as exc:
        if k > 0 and exc.limit == k:
            late, trace = exc.store, exc.trace
        else:
            return _inconclusive(str(exc))
    try:
        kill_inplace(late, f, jp, limit, trace)
    except StepLimitExceeded as exc:
        return _inconclusive(str(exc))
    bad = _leftover(f, late)
    if bad is not None:
        return bad
    rep = store_equiv(early, late)
    if rep.verdict:
        return rep
    alt = replay_without(f, jp, trace, late)
    alt.log = rep.log + alt.log
    if not alt.verdict:
        alt.witness = rep.witness
    return alt


def full_trace_length(prog: Program, query: Sequence[Constraint], limit: int = DEFAULT_STEP_LIMIT) -> int:
    store, _ = annotate_query(query)
    return len(run_inplace(store, translate_program(prog), limit))
