import logging

import pytest

from chrjx import annotate_query, format_store, kill, killc, parse_constraint, parse_program, parse_query, parse_store, run, translate_program
from chrjx.oracle import store_equiv
from chrjx.randprog import corpus
from chrjx.retraction import killc_choices


def solved(jprog, text):
    s, mapping = annotate_query(parse_query(text))
    s, _ = run(s, jprog)
    return s, dict((str(c), j) for c, j in mapping)


def live(store):
    return sorted(str(jc.constraint) for jc in store.live.values())


@pytest.fixture
def min_store(min_jprog):
    return solved(min_jprog, "min(1), min(0), min(2)")


@pytest.fixture
def path_store(path_jprog):
    return solved(path_jprog, "e(a,b), e(b,c), e(a,c)")


class TestKill:
    def test_kill_current_minimum(self, min_jprog, min_store):
        s, j = min_store
        after = kill(j["min(0)"], s, min_jprog)
        assert live(after) == ["min(1)"]
        assert store_equiv(after, parse_store("min(1)##[A], rem(min(2)##[C])##[A,C]."))

    def test_kill_non_minimum_keeps_answer(self, min_jprog, min_store):
        s, j = min_store
        after = kill(j["min(2)"], s, min_jprog)
        assert live(after) == ["min(0)"]
        assert all(j["min(2)"] not in e.outer for e in after.remembered.values())

    def test_input_untouched(self, min_jprog, min_store):
        s, j = min_store
        before = format_store(s)
        kill(j["min(0)"], s, min_jprog)
        assert format_store(s) == before

    def test_kill_edge(self, path_jprog, path_store):
        s, j = path_store
        after = kill(j["e(a,c)"], s, path_jprog)
        expected = parse_store(
            "p(a, b, 1)##[A], e(a, b)##[A], p(b, c, 1)##[B], e(b, c)##[B], p(a, c, 2)##[A, B]."
        )
        assert store_equiv(after, expected)

    def test_unknown_is_noop(self, min_jprog, min_store, caplog):
        s, _ = min_store
        with caplog.at_level(logging.WARNING):
            after = kill(99, s, min_jprog)
        assert format_store(after) == format_store(s)
        assert "unknown" in caplog.text

    def test_double_kill_is_noop(self, min_jprog, min_store):
        s, j = min_store
        once = kill(j["min(0)"], s, min_jprog)
        assert format_store(kill(j["min(0)"], once, min_jprog)) == format_store(once)

    def test_revive_then_kill(self, min_jprog, min_store):
        s, j = min_store
        s1 = kill(j["min(0)"], s, min_jprog)
        s2 = kill(j["min(1)"], s1, min_jprog)
        assert live(s2) == ["min(2)"]
        s3 = kill(j["min(2)"], s2, min_jprog)
        assert live(s3) == [] and not s3.remembered

    def test_kill_clears_failure(self):
        jp = translate_program(parse_program("a, b <=> false."))
        s, j = solved(jp, "a, b, c")
        assert s.failed is not None
        after = kill(j["a"], s, jp)
        assert after.failed is None and live(after) == ["b", "c"]

    def test_propagation_refires_for_revived_constraint(self):
        jp = translate_program(parse_program("p1 @ a(X) ==> b(X).\ns @ c(X) \\ a(X) <=> true."))
        s, j = solved(jp, "a(1), c(1)")
        assert live(s) == ["b(1)", "c(1)"]
        after = kill(j["c(1)"], s, jp)
        # the revived a(1) keeps its identity, so p1 does not fire again
        assert live(after) == ["a(1)", "b(1)"]


class TestKillc:
    def test_killc_min1(self, min_jprog, min_store):
        s, _ = min_store
        (after,) = list(killc(parse_constraint("min(1)"), s, min_jprog))
        assert store_equiv(after, parse_store("rem(min(2)##[C])##[B,C], min(0)##[B]."))

    def test_killc_min0(self, min_jprog, min_store):
        s, _ = min_store
        (after,) = list(killc(parse_constraint("min(0)"), s, min_jprog))
        assert store_equiv(after, parse_store("min(1)##[A], rem(min(2)##[C])##[A,C]."))

    def test_killc_derived_with_single_producer(self, path_jprog, path_store):
        s, j = path_store
        (after,) = list(killc(parse_constraint("p(a,c,1)"), s, path_jprog))
        assert store_equiv(after, kill(j["e(a,c)"], s, path_jprog))

    def test_killc_with_two_producers(self, path_jprog, path_store):
        s, j = path_store
        assert killc_choices(parse_constraint("p(a,c,2)"), s) == [j["e(a,b)"], j["e(b,c)"]]
        alts = list(killc(parse_constraint("p(a,c,2)"), s, path_jprog))
        assert len(alts) == 2
        assert store_equiv(alts[0], parse_store("p(b, c, 1)##[B], e(b, c)##[B], p(a, c, 1)##[C], e(a, c)##[C]."))
        assert store_equiv(alts[1], parse_store("p(a, b, 1)##[A], e(a, b)##[A], p(a, c, 1)##[C], e(a, c)##[C]."))

    def test_lazy(self, path_jprog, path_store):
        s, _ = path_store
        it = killc(parse_constraint("p(a,c,2)"), s, path_jprog)
        first = next(it)
        assert live(first) == ["e(a,c)", "e(b,c)", "p(a,c,1)", "p(b,c,1)"]

    def test_pattern_with_variables(self, min_jprog, min_store):
        s, j = min_store
        assert killc_choices(parse_constraint("min(X)"), s) == [j["min(0)"]]

    def test_absent_constraint(self, min_jprog, min_store, caplog):
        s, _ = min_store
        with caplog.at_level(logging.WARNING):
            assert list(killc(parse_constraint("min(7)"), s, min_jprog)) == []
        assert "no constraint" in caplog.text


@pytest.mark.parametrize("inst", corpus(23, 80), ids=lambda i: i.query_text)
def test_post_kill_hygiene(inst):
    """After any kill nothing live or remembered still depends on the victim."""
    jp = translate_program(inst.program)
    s, mapping = annotate_query(inst.query)
    s, _ = run(s, jp)
    for _, f in mapping:
        after = kill(f, s, jp)
        assert all(f not in jc.just for jc in after.live.values())
        assert all(f not in e.outer and f not in e.inner.just for e in after.remembered.values())
        assert all(f not in q.just for q in after.pending)
