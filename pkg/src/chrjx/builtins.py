"""Evaluation of the whitelisted built-in guard constraints."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Union

from .terms import Compound, Constraint, Int, Term, Var, is_ground

Binding = Dict[int, Term]

COMPARISONS = {
    "=<": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "=:=": lambda a, b: a == b,
    "=\\=": lambda a, b: a != b,
}
WHITELIST = frozenset(COMPARISONS) | {"is", "=", "true", "false"}
ARITH_OPS = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b}


@dataclass(frozen=True)
class Success:
    binding: Binding


@dataclass(frozen=True)
class Failure:
    pass


@dataclass(frozen=True)
class Inapplicable:
    reason: str


GuardOutcome = Union[Success, Failure, Inapplicable]
FAILURE = Failure()


def substitute(t: Term, b: Binding) -> Term:
    if isinstance(t, Var):
        return b.get(t.id, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(substitute(a, b) for a in t.args))
    return t


def eval_arith(t: Term, b: Binding) -> Optional[int]:
    """Evaluate an integer expression built from ints, bound variables, ``+ - *``."""
    if isinstance(t, Int):
        return t.value
    if isinstance(t, Var):
        if t.id not in b:
            return None
        v = b[t.id]
        return None if isinstance(v, Var) else eval_arith(v, b)
    if isinstance(t, Compound) and t.functor in ARITH_OPS and len(t.args) == 2:
        x = eval_arith(t.args[0], b)
        y = eval_arith(t.args[1], b)
        if x is None or y is None:
            return None
        return ARITH_OPS[t.functor](x, y)
    if isinstance(t, Compound) and t.functor == "-" and len(t.args) == 1:
        x = eval_arith(t.args[0], b)
        return None if x is None else -x
    return None


def _unbound(t: Term, b: Binding) -> bool:
    return isinstance(t, Var) and t.id not in b


def _bind(b: Binding, var: Var, value: Term) -> Binding:
    out = dict(b)
    out[var.id] = value
    return out


def eval_builtin(c: Constraint, b: Binding) -> GuardOutcome:
    sym = c.symbol
    if sym == "true":
        return Success(b)
    if sym == "false":
        return FAILURE
    if sym not in WHITELIST or len(c.args) != 2:
        return Inapplicable(f"unknown built-in {sym}/{len(c.args)}")
    lhs, rhs = c.args

    if sym == "is" or (sym == "=:=" and (_unbound(lhs, b) or _unbound(rhs, b))):
        if sym == "=:=" and _unbound(rhs, b) and not _unbound(lhs, b):
            lhs, rhs = rhs, lhs
        if _unbound(lhs, b):
            v = eval_arith(rhs, b)
            if v is None:
                return Inapplicable(f"cannot evaluate {rhs} in {c}")
            return Success(_bind(b, lhs, Int(v)))
        if sym == "is":
            sym = "=:="
        else:
            return Inapplicable(f"both sides of {c} unbound")

    if sym == "=":
        left, right = substitute(lhs, b), substitute(rhs, b)
        if _unbound(left, b) and is_ground(right):
            return Success(_bind(b, left, right))
        if _unbound(right, b) and is_ground(left):
            return Success(_bind(b, right, left))
        if not (is_ground(left) and is_ground(right)):
            return Inapplicable(f"non-ground syntactic match {c}")
        return Success(b) if left == right else FAILURE

    x = eval_arith(lhs, b)
    y = eval_arith(rhs, b)
    if x is None or y is None:
        return Inapplicable(f"non-integer or unbound operand in {c}")
    return Success(b) if COMPARISONS[sym](x, y) else FAILURE

