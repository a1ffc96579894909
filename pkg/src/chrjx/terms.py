"""Terms, constraints, justifications, rules and the constraint store."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

RESERVED_SYMBOLS = frozenset({"rem", "kill", "killc"})

USER = "user"
BUILTIN = "builtin"


@dataclass(frozen=True)
class Var:
    name: str
    id: int

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Int:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Compound:
    functor: str
    args: Tuple["Term", ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("compound term needs at least one argument")

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, Atom, Int, Compound]

_INFIX_PREC = {"+": 500, "-": 500, "*": 400}


def format_term(t: Term, max_prec: int = 999) -> str:
    """Prolog-style rendering; infix arithmetic is parenthesised only when needed."""
    if isinstance(t, Compound):
        prec = _INFIX_PREC.get(t.functor)
        if prec is not None and len(t.args) == 2:
            # left-associative: the right operand binds one level tighter
            s = f"{format_term(t.args[0], prec)}{t.functor}{format_term(t.args[1], prec - 1)}"
            return s if prec <= max_prec else f"({s})"
        if t.functor == "-" and len(t.args) == 1:
            return f"-({format_term(t.args[0])})"
        return f"{t.functor}({','.join(format_term(a) for a in t.args)})"
    return str(t)


# A justification is a plain non-negative int; a set of them is a sorted tuple.
Justification = int
JustificationSet = Tuple[int, ...]


def union_just(sets: Iterable[Iterable[int]]) -> JustificationSet:
    """Ordered duplicate-free union of justification sets."""
    out = set()
    for s in sets:
        out.update(s)
    return tuple(sorted(out))


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, Compound):
        return all(is_ground(a) for a in t.args)
    return True


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    elif isinstance(t, Compound):
        for a in t.args:
            yield from term_vars(a)


@dataclass(frozen=True)
class Constraint:
    symbol: str
    args: Tuple[Term, ...] = ()
    kind: str = USER

    @property
    def key(self) -> Tuple[str, int]:
        return (self.symbol, len(self.args))

    def vars(self) -> Iterator[Var]:
        for a in self.args:
            yield from term_vars(a)

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        if self.kind == BUILTIN and len(self.args) == 2:
            op = f" {self.symbol} " if self.symbol.isalpha() else self.symbol
            return f"{format_term(self.args[0], 699)}{op}{format_term(self.args[1], 699)}"
        return f"{self.symbol}({','.join(format_term(a) for a in self.args)})"


@dataclass(frozen=True)
class JustifiedConstraint:
    """A live user constraint with its justifications.

    ``origin`` names the constraint across removal and revival: a revived
    constraint gets a fresh ``store_id`` but keeps its origin, and the
    propagation history is keyed by origins.
    """

    constraint: Constraint
    just: JustificationSet
    store_id: int
    origin: int

    def __str__(self) -> str:
        return f"{self.constraint}##{list(self.just)}"


@dataclass(frozen=True)
class RemEntry:
    """``rem(inner)^outer``: a constraint removed by a rule instance justified by ``outer``."""

    inner: JustifiedConstraint
    outer: JustificationSet
    store_id: int


@dataclass(frozen=True)
class Rule:
    name: Optional[str]
    kept: Tuple[Constraint, ...]
    removed: Tuple[Constraint, ...]
    guard: Tuple[Constraint, ...] = ()
    body: Tuple[Constraint, ...] = ()

    def __post_init__(self):
        if not self.kept and not self.removed:
            raise ValueError("rule needs at least one head constraint")

    @property
    def head(self) -> Tuple[Constraint, ...]:
        return self.kept + self.removed

    @property
    def is_propagation(self) -> bool:
        return not self.removed

    @property
    def fails(self) -> bool:
        return any(c.kind == BUILTIN and c.symbol == "false" for c in self.body)


@dataclass(frozen=True)
class Program:
    rules: Tuple[Rule, ...] = ()

    @property
    def constraint_symbols(self) -> Dict[str, int]:
        """Declared user symbols (name -> arity) in order of first use."""
        out: Dict[str, int] = {}
        for r in self.rules:
            for c in r.head + r.body:
                if c.kind == USER:
                    out.setdefault(c.symbol, len(c.args))
        return out


@dataclass
class Store:
    """Live constraints, remembered entries and the tombstone set.

    The store is mutated in place by the engine internals; the public
    operations (``run``, ``kill``, ...) copy their input first, so callers can
    treat stores as snapshots.
    """

    live: Dict[int, JustifiedConstraint] = field(default_factory=dict)
    remembered: Dict[int, RemEntry] = field(default_factory=dict)
    killed: set = field(default_factory=set)
    # query constraints annotated but not yet activated, in query order
    pending: List[JustifiedConstraint] = field(default_factory=list)
    history: set = field(default_factory=set)
    failed: Optional[JustificationSet] = None
    next_store_id: int = 0
    next_just_id: int = 0
    next_var_id: int = 0
    by_key: Dict[Tuple[str, int], Dict[int, JustifiedConstraint]] = field(
        default_factory=dict, repr=False
    )

    def copy(self) -> "Store":
        return Store(
            live=dict(self.live),
            remembered=dict(self.remembered),
            killed=set(self.killed),
            pending=list(self.pending),
            history=set(self.history),
            failed=self.failed,
            next_store_id=self.next_store_id,
            next_just_id=self.next_just_id,
            next_var_id=self.next_var_id,
            by_key={k: dict(v) for k, v in self.by_key.items()},
        )

    def fresh_justification(self) -> int:
        j = self.next_just_id
        self.next_just_id += 1
        return j

    def fresh_store_id(self) -> int:
        i = self.next_store_id
        self.next_store_id += 1
        return i

    def fresh_var(self, name: str = "_G") -> Var:
        v = Var(f"{name}{self.next_var_id}", -1 - self.next_var_id)
        self.next_var_id += 1
        return v

    def add_live(
        self, c: Constraint, just: JustificationSet, origin: Optional[int] = None
    ) -> JustifiedConstraint:
        sid = self.fresh_store_id()
        jc = JustifiedConstraint(c, tuple(just), sid, sid if origin is None else origin)
        self.live[sid] = jc
        self.by_key.setdefault(c.key, {})[sid] = jc
        return jc

    def remove_live(self, store_id: int) -> JustifiedConstraint:
        jc = self.live.pop(store_id)
        self.by_key[jc.constraint.key].pop(store_id)
        return jc

    def add_rem(self, inner: JustifiedConstraint, outer: JustificationSet) -> RemEntry:
        entry = RemEntry(inner, tuple(outer), self.fresh_store_id())
        self.remembered[entry.store_id] = entry
        return entry

    def candidates(self, key: Tuple[str, int]) -> Sequence[JustifiedConstraint]:
        return list(self.by_key.get(key, {}).values())

    def justifications(self) -> set:
        out = set()
        for jc in self.live.values():
            out.update(jc.just)
        for e in self.remembered.values():
            out.update(e.outer)
        return out

    @property
    def settled(self) -> bool:
        k = self.killed
        return not any(k.intersection(jc.just) for jc in self.live.values()) and not any(
            k.intersection(e.outer) for e in self.remembered.values()
        )


def fresh_justification(store: Store) -> Tuple[int, Store]:
    """Allocate a fresh justification on a copy of ``store``."""
    s = store.copy()
    return s.fresh_justification(), s
