"""Logical retraction: kill/revive over tombstoned justifications, and killc."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple, Union

from .engine import DEFAULT_STEP_LIMIT, Trace, TraceEvent, match_constraint, run_inplace
from .terms import Constraint, JustifiedConstraint, Store
from .transform import JProgram

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KillRequest:
    """Either a justification id (``kill``) or a constraint pattern (``killc``)."""

    target: Union[int, Constraint]


def settle(store: Store, trace: Optional[Trace] = None) -> None:
    """Apply the kill and revive rules to exhaustion, in place."""
    killed = store.killed
    store.pending = [q for q in store.pending if not killed.intersection(q.just)]
    for sid, jc in list(store.live.items()):
        if killed.intersection(jc.just):
            store.remove_live(sid)
            if trace is not None:
                trace.append(TraceEvent("kill", removed=(sid,), just=jc.just))
    revive = sorted(
        (e for e in store.remembered.values() if killed.intersection(e.outer)),
        key=lambda e: e.inner.store_id,
    )
    for e in revive:
        del store.remembered[e.store_id]
        inner = e.inner
        jc = store.add_live(inner.constraint, inner.just, origin=inner.origin)
        if trace is not None:
            trace.append(TraceEvent("revive", removed=(e.store_id,), added=(jc,), just=e.outer))
        if killed.intersection(jc.just):
            store.remove_live(jc.store_id)
            if trace is not None:
                trace.append(TraceEvent("kill", removed=(jc.store_id,), just=jc.just))
    if store.failed is not None and killed.intersection(store.failed):
        store.failed = None


def kill_inplace(
    store: Store,
    f: int,
    prog: JProgram,
    limit: int = DEFAULT_STEP_LIMIT,
    trace: Optional[Trace] = None,
) -> Trace:
    trace = Trace() if trace is None else trace
    if not 0 <= f < store.next_just_id:
        log.warning("kill: unknown justification %s", f)
        return trace
    if f in store.killed:
        return trace
    store.killed.add(f)
    settle(store, trace)
    return run_inplace(store, prog, limit, trace)


def kill(f: int, store: Store, prog: JProgram, limit: int = DEFAULT_STEP_LIMIT) -> Store:
    """Retract justification ``f``: remove its consequences, revive what it removed, rerun."""
    s = store.copy()
    kill_inplace(s, f, prog, limit)
    return s


def find_target(
    pattern: Constraint, store: Store
) -> Optional[Tuple[str, JustifiedConstraint, Tuple[int, ...]]]:
    """Locate the constraint ``killc`` acts on and the justifications to choose from.

    Live constraints are preferred; for a remembered one only its own
    (producer) justifications are candidates, not those of its remover.
    """
    for jc in store.live.values():
        if match_constraint(pattern, jc.constraint, {}) is not None:
            return "live", jc, jc.just
    for e in store.remembered.values():
        if match_constraint(pattern, e.inner.constraint, {}) is not None:
            return "rem", e.inner, e.inner.just
    return None


def killc(
    pattern: Constraint, store: Store, prog: JProgram, limit: int = DEFAULT_STEP_LIMIT
) -> Iterator[Store]:
    """Lazily yield one final store per producer justification of ``pattern``."""
    target = find_target(pattern, store)
    if target is None:
        log.warning("killc: no constraint matches %s", pattern)
        return iter(())
    _, _, choices = target
    snapshot = store.copy()
    return (kill(f, snapshot, prog, limit) for f in choices)


def killc_choices(pattern: Constraint, store: Store) -> List[int]:
    target = find_target(pattern, store)
    return [] if target is None else list(target[2])
