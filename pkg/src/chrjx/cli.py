"""Command line front end: ``chrjx run | translate | check | repl``."""

from __future__ import annotations

import argparse
import random
import re
import sys
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Deque, Dict, Iterator, List, Optional, Sequence, Tuple

from . import oracle
from .engine import DEFAULT_STEP_LIMIT, StepLimitExceeded, Trace, TraceEvent, match_constraint, run_inplace
from .parser import ParseError, parse_constraint, parse_program, parse_query
from .printer import format_just, format_store, letter
from .randprog import corpus
from .retraction import kill_inplace, killc, killc_choices
from .terms import Constraint, Program, Store
from .transform import JProgram, TranslationError, annotate_query, format_jprogram, translate_program

EXIT_OK, EXIT_ERROR, EXIT_LIMIT = 0, 1, 2

HELP = """\
load <file>          load a program (bundled: min.chr, path.chr)
query <goal>         start a new store from a goal
add <goal>           add constraints to the current store
kill <just>          retract a justification (letter, number, or query constraint)
killc <constraint>   logically retract a constraint, first alternative
next                 switch to the next killc alternative
why <constraint>     show which query constraints justify a live constraint
show                 print the store
trace                print the recent trace events
reset                empty the store
help                 this text"""


class CommandError(Exception):
    pass


def read_program(path: str) -> str:
    """Read a program file, falling back to the bundled programs by name."""
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    bundled = resources.files("chrjx") / "programs" / p.name
    if bundled.is_file():
        return bundled.read_text(encoding="utf-8")
    raise CommandError(f"no such file: {path}")


@dataclass
class Session:
    program: Optional[JProgram] = None
    store: Store = field(default_factory=Store)
    names: Dict[int, Constraint] = field(default_factory=dict)
    trace: Deque[TraceEvent] = field(default_factory=lambda: deque(maxlen=200))
    alternatives: Optional[Iterator[Store]] = None
    limit: int = DEFAULT_STEP_LIMIT

    def require_program(self) -> JProgram:
        if self.program is None:
            raise CommandError("no program loaded (use: load <file>)")
        return self.program

    def add(self, goal: Sequence[Constraint]) -> None:
        prog = self.require_program()
        store, mapping = annotate_query(goal, self.store)
        trace = Trace()
        try:
            run_inplace(store, prog, self.limit, trace)
        finally:
            self.trace.extend(trace)
        self.store = store
        self.names.update((j, c) for c, j in mapping)
        self.alternatives = None

    def resolve_just(self, text: str) -> int:
        text = text.strip()
        if text.isdigit():
            return int(text)
        m = re.fullmatch(r"([A-Z])(\d*)", text)
        if m:
            return (ord(m.group(1)) - ord("A")) + 26 * int(m.group(2) or 0)
        c = parse_constraint(text)
        for j, q in self.names.items():
            if j not in self.store.killed and match_constraint(c, q, {}) is not None:
                return j
        raise CommandError(f"no query constraint matches {text}")

    def kill(self, f: int) -> None:
        prog = self.require_program()
        if not 0 <= f < self.store.next_just_id:
            raise CommandError(f"unknown justification {letter(f) if f >= 0 else f}")
        store = self.store.copy()
        trace = Trace()
        try:
            kill_inplace(store, f, prog, self.limit, trace)
        finally:
            self.trace.extend(trace)
        self.store = store
        self.alternatives = None

    def killc(self, pattern: Constraint) -> int:
        """Switch to the first killc alternative; returns how many alternatives exist."""
        prog = self.require_program()
        n = len(killc_choices(pattern, self.store))
        if n == 0:
            raise CommandError(f"no live or remembered constraint matches {pattern}")
        self.alternatives = killc(pattern, self.store, prog, self.limit)
        self.store = next(self.alternatives)
        return n

    def why(self, pattern: Constraint) -> str:
        for jc in self.store.live.values():
            if match_constraint(pattern, jc.constraint, {}) is not None:
                lines = [f"{jc.constraint}##{format_just(jc.just)}"]
                for j in jc.just:
                    src = self.names.get(j)
                    lines.append(f"  {letter(j)}: {src if src is not None else '?'}")
                return "\n".join(lines)
        raise CommandError(f"no live constraint matches {pattern}")

    def execute(self, line: str) -> str:
        """Run one REPL command; on error the session is left unchanged."""
        line = line.strip().rstrip(".")
        if not line or line.startswith("%"):
            return ""
        cmd, _, arg = line.partition(" ")
        arg = arg.strip()
        if cmd == "help":
            return HELP
        if cmd == "load":
            self.program = translate_program(parse_program(read_program(arg)))
            self.store, self.names, self.alternatives = Store(), {}, None
            return f"% loaded {len(self.program)} rule(s)"
        if cmd == "query":
            self.require_program()
            self.store, self.names = Store(), {}
            self.add(parse_query(arg))
            return format_store(self.store)
        if cmd == "add":
            self.add(parse_query(arg))
            return format_store(self.store)
        if cmd == "kill":
            self.kill(self.resolve_just(arg))
            return format_store(self.store)
        if cmd == "killc":
            n = self.killc(parse_constraint(arg))
            more = f"\n% {n - 1} more alternative(s), type next" if n > 1 else ""
            return format_store(self.store) + more
        if cmd == "next":
            if self.alternatives is None:
                raise CommandError("no pending killc alternatives")
            try:
                self.store = next(self.alternatives)
            except StopIteration:
                self.alternatives = None
                raise CommandError("no more alternatives") from None
            return format_store(self.store)
        if cmd == "why":
            return self.why(parse_constraint(arg))
        if cmd == "show":
            return format_store(self.store)
        if cmd == "trace":
            return "".join(Trace(list(self.trace)).dumps()).rstrip("\n")
        if cmd == "reset":
            self.store, self.names, self.alternatives = Store(), {}, None
            return "true."
        raise CommandError(f"unknown command {cmd!r} (try help)")


def repl_command(line: str, session: Session) -> Tuple[Session, str]:
    """Execute ``line`` against a copy of ``session``; errors leave the original untouched."""
    s = Session(
        session.program,
        session.store,
        dict(session.names),
        deque(session.trace, maxlen=session.trace.maxlen),
        session.alternatives,
        session.limit,
    )
    try:
        return s, s.execute(line)
    except (CommandError, ParseError, TranslationError) as exc:
        return session, f"error: {exc}"
    except StepLimitExceeded as exc:
        return session, f"error: {exc}"


# one-shot run


class _OrderedOp(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        ops = list(getattr(namespace, "ops", None) or [])
        ops.append((self.dest, values))
        namespace.ops = ops


def _apply_ops(session: Session, ops: List[Tuple[str, str]], enumerate_all: bool) -> Iterator[Tuple[Store, int]]:
    """Yield (final store, number of alternatives not shown) per explored branch."""
    if not ops:
        yield session.store, 0
        return
    kind, value = ops[0]
    if kind == "kill":
        session.kill(session.resolve_just(value))
        yield from _apply_ops(session, ops[1:], enumerate_all)
        return
    n = session.killc(parse_constraint(value))
    branches = [session.store, *session.alternatives] if enumerate_all else [session.store]
    hidden = 0 if enumerate_all else n - 1
    for alt in branches:
        branch = Session(session.program, alt, dict(session.names), session.trace, None, session.limit)
        for store, more in _apply_ops(branch, ops[1:], enumerate_all):
            yield store, more + hidden


def cmd_run(args) -> int:
    session = Session(limit=args.limit)
    session.program = translate_program(parse_program(read_program(args.file)))
    code = EXIT_OK
    try:
        session.add(parse_query(args.query or ""))
        outputs = list(_apply_ops(session, getattr(args, "ops", None) or [], args.all))
    except StepLimitExceeded as exc:
        print(format_store(exc.store))
        print(f"% step limit exceeded ({exc.limit} steps)", file=sys.stderr)
        outputs, code = [], EXIT_LIMIT
    finally:
        if args.trace:
            Path(args.trace).write_text(Trace(list(session.trace)).dumps(), encoding="utf-8")
    for i, (store, hidden) in enumerate(outputs):
        if i:
            print(";")
        print(format_store(store))
        if hidden:
            print(f"% {hidden} more alternative(s); use --all")
    return code


def cmd_translate(args) -> int:
    print(format_jprogram(translate_program(parse_program(read_program(args.file)))))
    return EXIT_OK


def _instances(args) -> List[Tuple[str, Program, List[Constraint], Optional[Constraint]]]:
    if args.file:
        prog = parse_program(read_program(args.file))
        return [(args.file, prog, parse_query(args.query or ""), None)]
    out = []
    for i, inst in enumerate(corpus(args.seed, args.count)):
        out.append((f"random#{i}", inst.program, inst.query, inst.extra))
    return out


def _checks(args, name, prog, query, extra) -> Iterator[Tuple[str, oracle.EquivReport]]:
    if args.theorem == 1:
        yield name, oracle.check_lemma1(prog, query, args.limit)
    elif args.theorem == 3:
        if extra is not None:
            yield f"{name} G={extra}", oracle.check_theorem3(prog, query, extra, args.limit)
        for i, g in enumerate(query):
            rest = query[:i] + query[i + 1:]
            yield f"{name} G={g}", oracle.check_theorem3(prog, rest, g, args.limit)
    else:
        n = oracle.full_trace_length(prog, query, args.limit)
        fs = range(len(query)) if extra is None else [random.Random(args.seed).randrange(len(query))]
        for f in fs:
            for k in range(n + 1):
                yield f"{name} f={letter(f)} k={k}", oracle.check_theorem2(prog, query, f, k, args.limit)


def cmd_check(args) -> int:
    failed = inconclusive = total = 0
    for name, prog, query, extra in _instances(args):
        for label, rep in _checks(args, name, prog, query, extra):
            total += 1
            if rep.inconclusive:
                inconclusive += 1
                status = "INCONCLUSIVE"
            elif rep.verdict:
                status = "PASS"
            else:
                failed += 1
                status = "FAIL"
            if status != "PASS" or args.verbose:
                print(f"{status} {label} [{rep.route}] {'; '.join(rep.log)}")
                if rep.witness:
                    print("  left:  " + rep.witness[0].replace("\n", " "))
                    print("  right: " + rep.witness[1].replace("\n", " "))
    kind = {1: "conservativity", 2: "commutation", 3: "add-then-kill"}[args.theorem]
    print(f"{kind}: {total - failed - inconclusive} passed, {failed} failed, {inconclusive} inconclusive")
    if failed:
        return EXIT_ERROR
    return EXIT_LIMIT if inconclusive else EXIT_OK


def cmd_repl(args, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = Session(limit=args.limit)
    if args.file:
        session, out = repl_command(f"load {args.file}", session)
        print(out, file=stdout)
    interactive = stdin.isatty()
    while True:
        if interactive:
            stdout.write("?- ")
            stdout.flush()
        line = stdin.readline()
        if not line or line.strip() in ("quit", "halt", "exit"):
            return EXIT_OK
        session, out = repl_command(line, session)
        if out:
            print(out, file=stdout)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chrjx", description="CHR with justifications and logical retraction")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a query, optionally retracting constraints")
    run.add_argument("file")
    run.add_argument("-q", "--query", default="")
    run.add_argument("--kill", action=_OrderedOp, metavar="ID|NAME", help="kill a justification")
    run.add_argument("--killc", action=_OrderedOp, metavar="CONSTRAINT", help="logically retract a constraint")
    run.add_argument("--all", action="store_true", help="print every killc alternative")
    run.add_argument("--limit", type=int, default=DEFAULT_STEP_LIMIT)
    run.add_argument("--trace", metavar="FILE", help="write trace events as JSON lines")
    run.set_defaults(func=cmd_run)

    tr = sub.add_parser("translate", help="print the justification-annotated program")
    tr.add_argument("file")
    tr.set_defaults(func=cmd_translate)

    ck = sub.add_parser("check", help="check conservativity (1), commutation (2) or correctness (3)")
    ck.add_argument("--theorem", type=int, choices=(1, 2, 3), required=True)
    ck.add_argument("--file")
    ck.add_argument("-q", "--query", default="")
    ck.add_argument("--seed", type=int, default=0)
    ck.add_argument("--count", type=int, default=100, help="random instances when no --file is given")
    ck.add_argument("--limit", type=int, default=DEFAULT_STEP_LIMIT)
    ck.add_argument("-v", "--verbose", action="store_true")
    ck.set_defaults(func=cmd_check)

    rp = sub.add_parser("repl", help="interactive session")
    rp.add_argument("file", nargs="?")
    rp.add_argument("--limit", type=int, default=DEFAULT_STEP_LIMIT)
    rp.set_defaults(func=cmd_repl)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "limit", 1) <= 0:
        print("error: --limit must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (CommandError, ParseError, TranslationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
