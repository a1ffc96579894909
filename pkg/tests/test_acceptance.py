"""End-to-end acceptance checks, one test per criterion.

Every test records its outcome through ``record_acceptance`` before asserting,
so the terminal summary prints a PASS/FAIL line even for failing criteria.
"""

import random
import time

from chrjx import annotate_query, kill, killc, parse_constraint, parse_query, parse_store, run
from chrjx.oracle import check_lemma1, check_theorem2, check_theorem3, full_trace_length, store_equiv
from chrjx.randprog import corpus
from chrjx.engine import DEFAULT_STEP_LIMIT, StepLimitExceeded

MIN_QUERY = "min(1), min(0), min(2)"
PATH_QUERY = "e(a,b), e(b,c), e(a,c)"

MIN_GOLDEN = "rem(min(1)##[A])##[A,B], rem(min(2)##[C])##[B,C],\nmin(0)##[B]."
MIN_AFTER_KILLC_1 = "rem(min(2)##[C])##[B,C],\nmin(0)##[B]."
PATH_GOLDEN = """rem(p(a, c, 2)##[A, B])##[A,B,C],
p(a, b, 1)##[A], e(a, b)##[A],
p(b, c, 1)##[B], e(b, c)##[B],
p(a, c, 1)##[C], e(a, c)##[C]."""
PATH_AFTER_KILL = """p(a, b, 1)##[A], e(a, b)##[A],
p(b, c, 1)##[B], e(b, c)##[B],
p(a, c, 2)##[A,B]."""
PATH_ALTERNATIVES = [
    """p(b, c, 1)##[B], e(b, c)##[B],
p(a, c, 1)##[C], e(a, c)##[C].""",
    """p(a, b, 1)##[A], e(a, b)##[A],
p(a, c, 1)##[C], e(a, c)##[C].""",
]

RANDOM_SEED = 2024


def solved(jprog, text):
    s, mapping = annotate_query(parse_query(text))
    s, _ = run(s, jprog)
    return s, {str(c): j for c, j in mapping}


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_1_min_golden(min_jprog, record_acceptance):
    (s, _), dt = timed(lambda: solved(min_jprog, MIN_QUERY))
    rep = store_equiv(s, parse_store(MIN_GOLDEN))
    passed = bool(rep) and dt < 1.0
    record_acceptance(1, passed, f"store_equiv={bool(rep)} time={dt:.3f}s")
    assert passed, rep.log


def test_criterion_2_killc_loser(min_jprog, record_acceptance):
    def go():
        s, _ = solved(min_jprog, MIN_QUERY)
        return list(killc(parse_constraint("min(1)"), s, min_jprog))

    alts, dt = timed(go)
    ok = len(alts) == 1 and bool(store_equiv(alts[0], parse_store(MIN_AFTER_KILLC_1)))
    passed = ok and dt < 1.0
    record_acceptance(2, passed, f"alternatives={len(alts)} match={ok} time={dt:.3f}s")
    assert passed


def test_criterion_3_killc_minimum(min_jprog, record_acceptance):
    def go():
        s, j = solved(min_jprog, MIN_QUERY)
        return list(killc(parse_constraint("min(0)"), s, min_jprog)), j

    (alts, j), dt = timed(go)
    (after,) = alts
    live = [(str(jc.constraint), jc.just) for jc in after.live.values()]
    rems = [(str(e.inner.constraint), e.inner.just, e.outer) for e in after.remembered.values()]
    j1, j2 = j["min(1)"], j["min(2)"]
    ok = live == [("min(1)", (j1,))] and rems == [("min(2)", (j2,), (j1, j2))]
    passed = ok and dt < 1.0
    record_acceptance(3, passed, f"live={live} rem={rems} time={dt:.3f}s")
    assert passed


def test_criterion_4_path(path_jprog, record_acceptance):
    details, results = [], []

    def part(name, fn):
        ok, dt = timed(fn)
        results.append(ok and dt < 1.0)
        details.append(f"({name}) {'ok' if ok else 'mismatch'} {dt:.3f}s")

    s, j = solved(path_jprog, PATH_QUERY)
    part("a", lambda: bool(store_equiv(solved(path_jprog, PATH_QUERY)[0], parse_store(PATH_GOLDEN))))
    part("b", lambda: bool(store_equiv(kill(j["e(a,c)"], s, path_jprog), parse_store(PATH_AFTER_KILL))))

    def alternatives():
        alts = list(killc(parse_constraint("p(a,c,2)"), s, path_jprog))
        return len(alts) == 2 and all(
            store_equiv(a, parse_store(text)) for a, text in zip(alts, PATH_ALTERNATIVES)
        )

    part("c", alternatives)
    passed = all(results)
    record_acceptance(4, passed, " ".join(details))
    assert passed, details


def test_criterion_5_conservativity(min_program, path_program, record_acceptance):
    def go():
        bad = []
        for name, prog, q in [("min", min_program, MIN_QUERY), ("path", path_program, PATH_QUERY)]:
            if not check_lemma1(prog, parse_query(q)):
                bad.append(name)
        insts = corpus(RANDOM_SEED, 500)
        bad += [inst.query_text for inst in insts if not check_lemma1(inst.program, inst.query)]
        return bad, len(insts)

    (bad, n), dt = timed(go)
    passed = not bad and n >= 500 and dt < 60
    record_acceptance(5, passed, f"bundled=2 random={n} failures={len(bad)} time={dt:.1f}s")
    assert passed, bad[:5]


def test_criterion_6_add_then_kill(min_program, path_program, record_acceptance):
    def go():
        bad, checks = [], 0
        for prog, text in [(min_program, MIN_QUERY), (path_program, PATH_QUERY)]:
            q = parse_query(text)
            for i, g in enumerate(q):
                checks += 1
                if not check_theorem3(prog, q[:i] + q[i + 1:], g):
                    bad.append(f"{text} G={g}")
        insts = corpus(RANDOM_SEED, 500)
        for inst in insts:
            checks += 1
            if not check_theorem3(inst.program, inst.query, inst.extra):
                bad.append(f"{inst.query_text} G={inst.extra_text}")
        return bad, checks, len(insts)

    (bad, checks, n), dt = timed(go)
    passed = not bad and n >= 500 and dt < 120
    record_acceptance(6, passed, f"checks={checks} random={n} failures={len(bad)} time={dt:.1f}s")
    assert passed, bad[:5]


def _commutes_everywhere(prog, q):
    n = full_trace_length(prog, q)
    return [(f, k) for f in range(len(q)) for k in range(n + 1) if not check_theorem2(prog, q, f, k)]


def test_criterion_7_commutation(min_program, path_program, record_acceptance):
    def go():
        bad, checks = [], 0
        for prog, text in [(min_program, MIN_QUERY), (path_program, PATH_QUERY)]:
            q = parse_query(text)
            checks += len(q) * (full_trace_length(prog, q) + 1)
            bad += [(text, fk) for fk in _commutes_everywhere(prog, q)]
        insts = corpus(RANDOM_SEED + 1, 200)
        for inst in insts:
            checks += len(inst.query) * (full_trace_length(inst.program, inst.query) + 1)
            bad += [(inst.query_text, fk) for fk in _commutes_everywhere(inst.program, inst.query)]
        return bad, checks, len(insts)

    (bad, checks, n), dt = timed(go)
    passed = not bad and n >= 200 and dt < 120
    record_acceptance(7, passed, f"checks={checks} random={n} failures={len(bad)} time={dt:.1f}s")
    assert passed, bad[:5]


def test_criterion_8_scale(min_jprog, record_acceptance):
    rng = random.Random(RANDOM_SEED)
    values = rng.sample(range(100_000), 1000)

    def go():
        s, _ = annotate_query(parse_query(", ".join(f"min({v})" for v in values)))
        s, _ = run(s, min_jprog, DEFAULT_STEP_LIMIT)
        for _ in range(10):
            (current,) = s.live.values()
            (s,) = killc(current.constraint, s, min_jprog, DEFAULT_STEP_LIMIT)
        return [jc.constraint.args[0].value for jc in s.live.values()]

    expected = sorted(values)[10]
    try:
        live, dt = timed(go)
    except StepLimitExceeded as exc:
        record_acceptance(8, False, f"step limit {exc.limit} exceeded")
        raise
    passed = live == [expected]
    record_acceptance(8, passed, f"live={live} expected={expected} time={dt:.2f}s")
    assert passed
