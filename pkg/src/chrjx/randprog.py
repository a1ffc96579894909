"""Seeded generator of small terminating programs and ground queries.

Programs range over ``a/1``, ``b/1`` and ``c/2``. Symbols are layered
(a < b < c) and a rule body may only mention symbols above every head
symbol, which together with the propagation history bounds every run.
Guards are integer comparisons over head variables, optionally followed by
an ``is`` binding used in the body.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Tuple

from .parser import parse_program, parse_query
from .terms import Constraint, Program

SYMBOLS = {"a": 1, "b": 1, "c": 2}
LEVEL = {"a": 0, "b": 1, "c": 2}
COMPARE_OPS = ["<", "=<", ">", ">=", "=:=", "=\\="]
VARS = ["X", "Y", "Z"]


@dataclass(frozen=True)
class Instance:
    program_text: str
    query_text: str
    extra_text: str

    @property
    def extra(self) -> Constraint:
        return parse_query(self.extra_text)[0]

    @property
    def program(self) -> Program:
        return parse_program(self.program_text)

    @property
    def query(self) -> List[Constraint]:
        return parse_query(self.query_text)


def _head_constraint(rng: random.Random, sym: str, used: List[str]) -> str:
    args = []
    for _ in range(SYMBOLS[sym]):
        if rng.random() < 0.1:
            args.append(str(rng.randint(0, 2)))
        else:
            v = rng.choice(VARS)
            args.append(v)
            if v not in used:
                used.append(v)
    return f"{sym}({','.join(args)})"


def random_rule(rng: random.Random, name: str) -> str:
    return _random_rule(rng, name)[0]


def _random_rule(rng: random.Random, name: str) -> Tuple[str, List[str]]:
    kind = rng.choice(["simplification", "simpagation", "propagation"])
    n = 2 if kind == "simpagation" else rng.randint(1, 2)
    syms = [rng.choice(list(SYMBOLS)) for _ in range(n)]
    used: List[str] = []
    heads = [_head_constraint(rng, s, used) for s in syms]

    guard = []
    if used and rng.random() < 0.5:
        lhs = rng.choice(used)
        rhs = rng.choice(used + [str(rng.randint(0, 2))])
        guard.append(f"{lhs}{rng.choice(COMPARE_OPS)}{rhs}")
    body_terms = list(used) + ["0", "1", "2"]
    if used and rng.random() < 0.2:
        guard.append(f"W is {rng.choice(used)}+1")
        body_terms.append("W")

    top = max(LEVEL[s] for s in syms)
    allowed = [s for s in SYMBOLS if LEVEL[s] > top]
    body = []
    if allowed:
        for _ in range(rng.randint(0, 2)):
            s = rng.choice(allowed)
            body.append(f"{s}({','.join(rng.choice(body_terms) for _ in range(SYMBOLS[s]))})")
    if not body and kind == "propagation" and allowed:
        s = rng.choice(allowed)
        body.append(f"{s}({','.join(rng.choice(body_terms) for _ in range(SYMBOLS[s]))})")

    if kind == "simpagation":
        head = f"{heads[0]} \\ {heads[1]} <=>"
    elif kind == "simplification":
        head = f"{', '.join(heads)} <=>"
    else:
        head = f"{', '.join(heads)} ==>"
    g = f"{', '.join(guard)} | " if guard else ""
    return f"{name} @ {head} {g}{', '.join(body) or 'true'}.", syms


def random_query(rng: random.Random, max_len: int = 6, symbols=None) -> str:
    symbols = list(SYMBOLS) if symbols is None else symbols
    out = []
    for _ in range(rng.randint(min(3, max_len), max_len)):
        s = rng.choice(symbols)
        out.append(f"{s}({','.join(str(rng.randint(0, 2)) for _ in range(SYMBOLS[s]))})")
    return ", ".join(out)


def random_instance(rng: random.Random, max_rules: int = 3, max_query: int = 6) -> Instance:
    rules, heads = [], set()
    for i in range(rng.randint(1, max_rules)):
        text, syms = _random_rule(rng, f"r{i}")
        rules.append(text)
        heads.update(syms)
    # queries draw from the symbols the rules actually consume
    symbols = sorted(heads)
    return Instance(
        "\n".join(rules) + "\n",
        random_query(rng, max_query, symbols),
        random_query(rng, 1, symbols),
    )


def corpus(seed: int, count: int) -> List[Instance]:
    rng = random.Random(seed)
    return [random_instance(rng) for _ in range(count)]
