"""Surface syntax for rules and stores."""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional

from .terms import Program, Rule, Store


def letter(j: int) -> str:
    """Justification id as a Prolog-style variable: A..Z, then A1..Z1, ..."""
    q, r = divmod(j, 26)
    return chr(ord("A") + r) + (str(q) if q else "")


def format_just(just: Iterable[int], names: Optional[Dict[int, str]] = None) -> str:
    return "[" + ",".join(names[j] if names else letter(j) for j in just) + "]"


def format_rule(r: Rule) -> str:
    prefix = f"{r.name} @ " if r.name is not None else ""
    kept = ", ".join(str(c) for c in r.kept)
    removed = ", ".join(str(c) for c in r.removed)
    if kept and removed:
        head = f"{kept} \\ {removed} <=>"
    elif removed:
        head = f"{removed} <=>"
    else:
        head = f"{kept} ==>"
    guard = ", ".join(str(c) for c in r.guard)
    body = ", ".join(str(c) for c in r.body) or "true"
    return f"{prefix}{head} {guard + ' | ' if guard else ''}{body}."


def format_program(p: Program) -> str:
    return "".join(format_rule(r) + "\n" for r in p.rules)


def store_lines(store: Store) -> List[str]:
    """Live constraints then remembered entries, each in store_id order."""
    lines = [f"{jc.constraint}##{format_just(jc.just)}" for jc in store.live.values()]
    lines += [
        f"rem({e.inner.constraint}##{format_just(e.inner.just)})##{format_just(e.outer)}"
        for e in store.remembered.values()
    ]
    return lines


def format_store(store: Store) -> str:
    if store.failed is not None:
        return "false."
    lines = store_lines(store)
    if not lines:
        return "true."
    return ",\n".join(lines) + "."
