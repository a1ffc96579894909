import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chrjx import Atom, Compound, Constraint, Int, ParseError, format_rule, parse_program, parse_query, parse_store
from chrjx.parser import parse_constraint
from chrjx.randprog import random_rule
from chrjx.terms import BUILTIN, Var


def canon(rule):
    """Rule with variable ids renumbered by first appearance."""
    ids = {}

    def rn(t):
        if isinstance(t, Var):
            return Var(t.name, ids.setdefault(t.id, len(ids)))
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(rn(a) for a in t.args))
        return t

    def rc(cs):
        return tuple(Constraint(c.symbol, tuple(rn(a) for a in c.args), c.kind) for c in cs)

    return (rule.name, rc(rule.kept), rc(rule.removed), rc(rule.guard), rc(rule.body))


class TestProgram:
    def test_simpagation(self):
        (r,) = parse_program("min(N) \\ min(M) <=> N=<M | true.").rules
        n, m = r.kept[0].args[0], r.removed[0].args[0]
        assert r.name is None
        assert [c.symbol for c in r.kept] == ["min"] and [c.symbol for c in r.removed] == ["min"]
        assert r.guard == (Constraint("=<", (n, m), BUILTIN),)
        assert r.body == ()

    def test_named_propagation(self):
        (r,) = parse_program("e @ e(X,Y) ==> p(X,Y,1).").rules
        x, y = r.kept[0].args
        assert r.name == "e" and r.removed == ()
        assert r.body == (Constraint("p", (x, y, Int(1))),)

    def test_arithmetic_guard(self):
        (r,) = parse_program("ep @ e(X,Y), p(Y,Z,L) ==> L1=:=L+1 | p(X,Z,L1).").rules
        (g,) = r.guard
        assert g.symbol == "=:="
        l1, rhs = g.args
        assert l1.name == "L1"
        assert rhs == Compound("+", (r.kept[1].args[2], Int(1)))
        assert r.body[0].args[2] == l1

    def test_simplification_has_no_kept_head(self):
        (r,) = parse_program("a(X), b(X) <=> c(X,X).").rules
        assert r.kept == () and len(r.removed) == 2

    def test_comments_and_whitespace(self):
        prog = parse_program("% header\n\nr1 @ a(X) ==> b(X). % trailing\n  r2 @ b(X) <=> true.\n")
        assert [r.name for r in prog.rules] == ["r1", "r2"]

    def test_body_false_is_kept(self):
        (r,) = parse_program("a, b <=> false.").rules
        assert r.fails

    def test_variables_renamed_apart(self):
        r1, r2 = parse_program("a(X) ==> b(X).\na(X) <=> true.").rules
        assert r1.kept[0].args[0].id != r2.removed[0].args[0].id

    def test_anonymous_variables_are_distinct(self):
        (r,) = parse_program("a(_, _) <=> true.").rules
        x, y = r.removed[0].args
        assert x.id != y.id

    def test_empty_program(self):
        assert parse_program("").rules == ()

    @pytest.mark.parametrize(
        "text",
        [
            "rem(X) <=> true.",
            "a(X) ==> kill(X).",
            "killc(X) <=> true.",
            "a(X) <=> X < 1.",
            "a(X) <=> foo(X) | true.",
            "a(X) \\ b(X) ==> true.",
            "a(X) <=> true",
            "a(X) b(X) <=> true.",
            "r @ a <=> true.\nr @ b <=> true.",
            "a(X) <=> $.",
        ],
    )
    def test_rejections(self, text):
        with pytest.raises(ParseError):
            parse_program(text)

    def test_error_span(self):
        with pytest.raises(ParseError) as exc:
            parse_program("a(X) <=> true.\nb(X) <=> rem(X).")
        assert exc.value.span.line == 2
        assert exc.value.span.column == 10


class TestQuery:
    def test_min_query(self):
        assert parse_query("min(1), min(0), min(2)") == [
            Constraint("min", (Int(1),)),
            Constraint("min", (Int(0),)),
            Constraint("min", (Int(2),)),
        ]

    def test_edges(self):
        q = parse_query("e(a,b), e(b,c), e(a,c)")
        assert [c.args for c in q] == [
            (Atom("a"), Atom("b")),
            (Atom("b"), Atom("c")),
            (Atom("a"), Atom("c")),
        ]

    def test_empty(self):
        assert parse_query("") == []
        assert parse_query("   ") == []

    def test_negative_integers(self):
        assert parse_query("min(-1)") == [Constraint("min", (Int(-1),))]

    @pytest.mark.parametrize("text", ["X < 1", "min(1), 2 =< 3", "rem(a)", "min(1) min(2)", "true"])
    def test_rejections(self, text):
        with pytest.raises(ParseError):
            parse_query(text)

    def test_parse_constraint_needs_one(self):
        with pytest.raises(ParseError):
            parse_constraint("a, b")


class TestRoundTrip:
    @pytest.mark.parametrize(
        "text",
        [
            "min(N) \\ min(M) <=> N=<M | true.",
            "pp @ p(X,Y,L1) \\ p(X,Y,L2) <=> L1=<L2 | true.",
            "ep @ e(X,Y), p(Y,Z,L) ==> L1=:=L+1 | p(X,Z,L1).",
            "a(X), b(Y) <=> X*(Y+1) > X-Y-1, W is X+1 | c(W,f(X)).",
            "a <=> false.",
        ],
    )
    def test_examples(self, text):
        (r,) = parse_program(text).rules
        (back,) = parse_program(format_rule(r)).rules
        assert canon(back) == canon(r)

    @settings(max_examples=200)
    @given(st.integers(0, 10**9))
    def test_random_rules(self, seed):
        text = random_rule(random.Random(seed), "r")
        (r,) = parse_program(text).rules
        (back,) = parse_program(format_rule(r)).rules
        assert canon(back) == canon(r)


class TestStoreText:
    def test_answer_text(self):
        s = parse_store("rem(min(1)##[A])##[A,B], rem(min(2)##[C])##[B,C],\nmin(0)##[B].")
        assert [str(jc.constraint) for jc in s.live.values()] == ["min(0)"]
        assert [(str(e.inner.constraint), e.inner.just, e.outer) for e in s.remembered.values()] == [
            ("min(1)", (0,), (0, 1)),
            ("min(2)", (2,), (1, 2)),
        ]

    def test_spaces_in_arguments(self):
        s = parse_store("p(a, c, 2)##[A, B].")
        (jc,) = s.live.values()
        assert jc.just == (0, 1)
